# config.py

from dataclasses import dataclass, fields, asdict
import json

from HypLab.group_model import DEFAULT_ENUMERATION_CAP, parse_model

FORMATS = ("csv", "json")
DENSITY_KINDS = ("exact", "patterson")


@dataclass
class RunConfig:
    """
    Parameters of one hyplab run. The seed determines every pseudo-random test vector.
    """
    command: str = None
    group: str = "free:2"
    density: str = "exact"
    n: int = 6
    rho: int = 1
    t: float = 4.0
    epsilon: float = 1.0
    aperture: float = 1.0
    depth: int = 3
    radius: int = 12
    max_n: int = 20
    max_depth: int = 64
    seed: int = 0
    threads: int = 1
    cap: int = DEFAULT_ENUMERATION_CAP
    trials: int = 50
    levels: int = 10
    function: str = "indicator:a"
    direction: str = "a^inf"
    patterson_offset: float = 0.05
    out: str = None
    format: str = "csv"
    printlog: bool = False
    timestamp: bool = False

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def from_sources(cls, command, file_values=None, flag_values=None):
        """
        Defaults < config file < explicit flags. Flag values of None count as not given.
        """
        merged = {}
        for source in (file_values or {}, flag_values or {}):
            merged.update({k: v for k, v in source.items() if v is not None})
        merged["command"] = command or merged.get("command")
        config = cls(**merged)
        config.validate()
        return config

    def validate(self):
        if not self.command:
            raise ValueError("No command given. Choose one of the hyplab sub-commands.")
        parse_model(self.group)
        if self.density not in DENSITY_KINDS:
            raise ValueError(f"Invalid density: {self.density}. Choose from {DENSITY_KINDS}.")
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"Invalid epsilon: {self.epsilon}. Choose 0 < epsilon <= 1.")
        if self.t < 0:
            raise ValueError(f"Invalid t: {self.t}. Choose t >= 0.")
        if self.depth < 0 or self.depth > self.max_depth:
            raise ValueError(f"Invalid depth: {self.depth}. Choose 0 <= depth <= {self.max_depth}.")
        if self.threads < 1:
            raise ValueError(f"Invalid thread count: {self.threads}. Choose threads >= 1.")
        if self.cap < 1:
            raise ValueError(f"Invalid enumeration cap: {self.cap}. Choose cap >= 1.")
        if self.n < 0 or self.rho < 0:
            raise ValueError(f"Invalid annulus: n={self.n}, rho={self.rho}.")
        if self.aperture <= 0:
            raise ValueError(f"Invalid aperture: {self.aperture}. Choose C > 0.")
        if self.format not in FORMATS:
            raise ValueError(f"Invalid format: {self.format}. Choose from {FORMATS}.")

    def as_dict(self):
        return asdict(self)


def load_config(path):
    """
    Reads a JSON config file whose keys are the long flag names with dashes replaced by
    underscores.
    """
    with open(path, "r") as file:
        values = json.load(file)
    if not isinstance(values, dict):
        raise ValueError(f"Config file {path} must hold a JSON object.")
    unknown = sorted(set(values) - set(RunConfig.keys()))
    if unknown:
        raise ValueError(f"Unknown config keys {unknown}. Allowed keys: {RunConfig.keys()}.")
    return values
