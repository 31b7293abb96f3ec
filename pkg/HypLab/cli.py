# cli.py
"""
hyplab: experiment runner for conformal densities, boundary representations and decay
estimates on hyperbolic groups.
"""

from HypLab.dependencies import *
import argparse
import datetime
import json
import sys

from HypLab.config import RunConfig, load_config, FORMATS, DENSITY_KINDS
from HypLab.event_bus import EventBus
from HypLab.check_records_manager import CheckRecordsManager
from HypLab.executor import make_executor
from HypLab.group_model import FreeGroup, GroupElement, parse_model, random_element, words_of_length
from HypLab.boundary_measure import (BoundaryPoint, VisualMetricParams, exact_free_group_density,
                                     patterson_density, certify_ahlfors_regularity,
                                     check_conformality, check_invariance, free_group_visual_mass)
from HypLab.step_function import StepFunction
from HypLab.poisson_kernel import (harish_chandra, fit_harish_chandra_estimates,
                                   free_group_harish_chandra)
from HypLab.boundary_rep import check_cs_poisson
from HypLab.fatou_lab import (ApproachDomain, PointMass, check_weak_11, fatou_experiment,
                              fatou_counterexample_probe, structured_unbounded_family,
                              radial_error_bound)
from HypLab.decay_suite import (annulus_average, dual_l1_check, rd_sum, roblin_experiment,
                                equidistribution_trace)
from HypLab.schwartz_algebra import (HarishChandraTable, SchwartzElement, critical_degree,
                                     trick2_sum, trick2_constant, check_algebra_closure,
                                     check_l2_boundedness)
from HypLab.errors import HypLabError, EstimateViolationError

SCHEMA_VERSION = 1
COMMANDS = ("hc-function", "density", "fatou", "maximal", "rd-sum", "annulus-average",
            "equidistribution", "schwartz", "cs-lemma")


# -- inputs --------------------------------------------------------------------

def build_density(config):
    model = parse_model(config.group)
    if config.density == "exact" and isinstance(model, FreeGroup):
        return exact_free_group_density(model, depth=config.max_depth)
    depth = max(config.depth, 3)
    if config.printlog:
        print(f"density: Patterson construction on {model.name} at depth {depth}")
    return patterson_density(model, s=model.alpha + config.patterson_offset, radius=max(16, depth + 5),
                             depth=depth)


def parse_function(density, text, rng):
    """
    'one', 'const:<c>', 'indicator:<word>' or 'random:<depth>'.
    """
    kind, _, arg = text.partition(":")
    if kind == "one":
        return StepFunction.constant(density)
    if kind == "const":
        return StepFunction.constant(density, float(arg))
    if kind == "indicator":
        return StepFunction.indicator(density, arg)
    if kind == "random":
        return StepFunction.random(density, int(arg), rng)
    raise ValueError(f"Invalid function: {text}. Choose one, const:c, indicator:word or random:depth.")


def random_unit(density, depth, rng):
    f = StepFunction.random(density, depth, rng, nonnegative=False)
    return f / f.norm_l2()


def provenance(density):
    return {"model": density.model.name, "alpha": density.alpha,
            "delta": float(density.model.delta), "C_q": density.c_q}


# -- commands ------------------------------------------------------------------

def run_hc_function(config, density, executor, bus):
    model = density.model
    # a depth-M table resolves phi up to length M - 1
    top = config.max_n if density.is_exact else min(config.max_n, density.max_depth - 1)
    fit = fit_harish_chandra_estimates(density, 1, max(top, 2), seed=config.seed, executor=executor)
    bus.publish_check("hc-function/fit", True, q1=list(fit.q1), q2=list(fit.q2), R=fit.R, N=fit.N,
                      witnesses=fit.witnesses)
    rows = []
    for n in range(top + 1):
        gamma = GroupElement(model, model.canonical_extension((), n))
        phi = harish_chandra(density, gamma)
        lower, upper = fit.lower(n), fit.upper(n)
        row = {"n": n, "phi": phi, "Q1_bound": lower, "Q2_bound": upper,
               "ratio_lower": phi / lower, "ratio_upper": phi / upper}
        symmetric = abs(harish_chandra(density, ~gamma) - phi) <= 1e-12 * phi
        bus.publish_check(f"hc-function/symmetry/n={n}", symmetric or not density.is_exact)
        if density.is_isotropic:
            exact = free_group_harish_chandra(model.rank, n)
            row["closed_form"] = exact
            row["ratio_closed_form"] = phi / exact
            bus.publish_check(f"hc-function/closed-form/n={n}", abs(phi - exact) <= 1e-10 * exact,
                              relative_error=abs(phi - exact) / exact)
        rows.append(row)
        if config.printlog:
            print(f"hc-function n={n}: phi={phi:.12g}")
    return rows


def run_density(config, density, executor, bus):
    model = density.model
    params = VisualMetricParams.for_model(model, config.epsilon)
    depth = min(config.depth, density.max_depth)
    exact = exact_free_group_density(model) if isinstance(model, FreeGroup) else None
    rows = []
    for word, mass in density.at(model.identity()).masses(depth).items():
        row = {"word": model.format_word(word), "mass": mass}
        if exact is not None:
            row["exact_mass"] = exact.mass(word)
            row["abs_error"] = abs(mass - row["exact_mass"])
        rows.append(row)
    if exact is not None:
        worst = max(row["abs_error"] for row in rows)
        bus.publish_check("density/masses", worst <= 0.02, worst_abs_error=worst)
    bus.publish_check("density/quasi-conformality", density.c_q <= 1.2, C_q=density.c_q)
    report = certify_ahlfors_regularity(density.at(model.identity()), params,
                                        min(10, density.max_depth))
    bus.publish_check("density/ahlfors", report.certified and report.k <= 3, D=report.D, k=report.k,
                      depth=report.depth)
    if density.is_exact:
        defect = check_conformality(density, samples=200, depth=min(6, depth + 3), seed=config.seed)
        bus.publish_check("density/conformality", defect <= 1e-12, worst_relative_defect=defect)
        defect = check_invariance(density, samples=50, depth=max(1, min(depth, 6)), seed=config.seed,
                                  reference=lambda y, w: free_group_visual_mass(density.model, y, w))
        bus.publish_check("density/invariance", defect <= 1e-12, worst_relative_defect=defect)
    return rows


def run_fatou(config, density, executor, bus):
    model = density.model
    rng = np.random.default_rng(config.seed)
    f = parse_function(density, config.function, rng)
    v = BoundaryPoint.parse(model, config.direction)
    dom = ApproachDomain.build(model, v, config.aperture, config.epsilon)
    trace = fatou_experiment(density, f, dom, config.max_n, executor=executor)
    bound = radial_error_bound(density, f, config.max_n)
    bus.publish_check("fatou/trace", trace.final_error <= bound * (1 + 1e-12) or bound == math.inf,
                      final_error=trace.final_error, bound=bound, limit=trace.limit)
    probe_length = min(config.max_n, 20)
    if probe_length >= 5:
        probe = fatou_counterexample_probe(density, structured_unbounded_family(density, v), v,
                                           probe_length)
        ratios = dict(probe.trace)
        tail = [ratios[n] for n in range(5, probe_length + 1)]
        growing = all(b >= a for a, b in zip(tail, tail[1:]))
        bus.publish_check("fatou/probe", growing and ratios[probe_length] > 2 * ratios[5],
                          r_5=ratios[5], r_last=ratios[probe_length], truncation=probe.truncation)
    return trace.rows


def maximal_inputs(density, depth, trials, rng):
    model = density.model
    inputs = [("density", density)]
    for length in (1, 2):
        for w in words_of_length(model, length):
            inputs.append((f"indicator:{model.format_word(w)}", StepFunction.indicator(density, w)))
    for g in model.generators():
        point = BoundaryPoint(model, g.word)
        inputs.append((f"point:{point}", PointMass(point)))
    for i in range(trials):
        inputs.append((f"random:{i}", StepFunction.random(density, depth, rng)))
    return inputs


def run_maximal(config, density, executor, bus):
    rng = np.random.default_rng(config.seed)
    depth = max(config.depth, 2)
    levels = list(np.geomspace(0.05, 5.0, config.levels))
    reports = check_weak_11(density, maximal_inputs(density, depth, config.trials, rng), levels,
                            depth, config.epsilon)
    rows = []
    for report in reports:
        bus.publish_check(f"maximal/{report.label}", report.passed and report.dyadic_passed,
                          norm=report.norm, dimension=report.dimension)
        rows.extend(report.rows())
    return rows


def run_rd_sum(config, density, executor, bus):
    rng = np.random.default_rng(config.seed)
    fit = fit_harish_chandra_estimates(density, 1, max(config.n, 2), seed=config.seed,
                                       executor=executor)
    vectors = [("one", StepFunction.constant(density))]
    vectors += [(f"random:{i}", random_unit(density, config.depth, rng)) for i in range(config.trials)]
    rows = []
    for label, xi in vectors:
        report = rd_sum(density, xi, config.n, fit=fit, executor=executor, printlog=config.printlog)
        bus.publish_check(f"rd-sum/{label}", report.certified and report.monotone,
                          M=report.constant_m, C_prime=report.constant_c,
                          measured_exponent=report.measured_exponent())
        for k, s, q, r in zip(report.radii, report.sums, report.bounds, report.cubic_ratios()):
            rows.append({"input": label, "n": k, "S": s, "Q": q, "S_over_cubic": r})
    return rows


def run_annulus_average(config, density, executor, bus):
    rng = np.random.default_rng(config.seed)
    test_functions = [StepFunction.constant(density), StepFunction.indicator(density, (0,))]
    test_functions += [StepFunction.random(density, config.depth, rng) for _ in range(3)]
    test_functions = [f / f.norm_l1() for f in test_functions]
    rows, sups = [], {}
    for n in range(config.n + 1):
        average = annulus_average(density, n, config.rho, cap=config.cap, executor=executor)
        sups[n] = average.sup
        row = {"n": n, "rho": config.rho, "count": average.count, "sup": average.sup,
               "integral": average.integral()}
        worst_gap, holds = 0.0, True
        for f in test_functions:
            dual = dual_l1_check(density, f, n, config.rho, average, executor)
            worst_gap = max(worst_gap, dual.gap)
            holds = holds and dual.holds
        row["dual_gap"] = worst_gap
        rows.append(row)
        bus.publish_check(f"annulus-average/n={n}", holds and worst_gap <= 1e-10, sup=average.sup,
                          dual_gap=worst_gap)
    upper = [sups[n] for n in sups if n > config.n // 2]
    lower = [sups[n] for n in sups if n <= config.n // 2]
    if upper and lower:
        bus.publish_check("annulus-average/stability", max(upper) <= 1.05 * max(lower),
                          max_lower=max(lower), max_upper=max(upper))
    return rows


def run_equidistribution(config, density, executor, bus):
    rng = np.random.default_rng(config.seed)
    window = (max(1, config.n // 2), max(config.n, 2))
    f = parse_function(density, config.function, rng)
    f = f / f.norm_l2()
    report = roblin_experiment(density, f, f, config.rho, window, executor=executor)
    bus.publish_check("equidistribution/roblin", report.certified, constant=report.constant,
                      max_ratio=report.max_ratio, slack=report.slack, caveat=report.caveat)
    rows = [{"trace": "roblin", "n": row["n"], "value": row["sum"], "reference": row["Q"],
             "ratio": row["ratio"]} for row in report.rows]
    first = density.model.generators()[0].word
    for row in equidistribution_trace(density, first, first, window):
        rows.append({"trace": "orbit", "n": row["n"], "value": row["value"],
                     "reference": row["target"], "ratio": row["ratio"]})
    return rows


def run_schwartz(config, density, executor, bus):
    model = density.model
    rng = np.random.default_rng(config.seed)
    t = config.t
    t0 = critical_degree(density)
    rows = []
    if t <= t0:
        report = trick2_sum(density, model.identity(), t, config.radius)
        bus.publish_check("schwartz/convergence", False, t=t, t0=t0, partial=report.partial)
        rows.append({"check": "convergence", "passed": False, "value": report.partial,
                     "bound": math.inf})
        return rows
    phi = HarishChandraTable(density)
    ratios = {}
    for radius in (config.radius, config.radius + 2):
        ratios[radius] = [trick2_sum(density, GroupElement(model, model.canonical_extension((), n)),
                                     t, radius, phi) for n in range(7)]
    first = [r.ratio for r in ratios[config.radius]]
    second = [r.ratio for r in ratios[config.radius + 2]]
    spread = max(first) / min(first)
    drift = abs(max(second) - max(first)) / max(first)
    bus.publish_check("schwartz/trick2", spread <= 3 and drift < 0.01, spread=spread, drift=drift,
                      tail=ratios[config.radius][0].tail)
    rows.append({"check": "trick2-spread", "passed": spread <= 3, "value": spread, "bound": 3.0})
    rows.append({"check": "trick2-drift", "passed": drift < 0.01, "value": drift, "bound": 0.01})

    constant, _ = trick2_constant(density, t, config.radius, 10, phi)
    closure_ok, l2_ok = 0, 0
    for _ in range(config.trials):
        f1 = SchwartzElement.random(phi, 5, t, rng)
        f2 = SchwartzElement.random(phi, 5, t, rng)
        closure = check_algebra_closure(f1, f2, t, constant)
        closure_ok += closure.certified
        f = SchwartzElement.random(phi, 4, t, rng)
        h = SchwartzElement.random(phi, 6, t, rng)
        l2 = check_l2_boundedness(f, h, t, constant)
        l2_ok += l2.certified
    bus.publish_check("schwartz/closure", closure_ok == config.trials, certified=closure_ok,
                      trials=config.trials, B_t=2 ** (t + 1) * constant, C_t=constant)
    bus.publish_check("schwartz/l2", l2_ok == config.trials, certified=l2_ok, trials=config.trials,
                      C_t=constant, C_t_squared=constant ** 2)
    rows.append({"check": "closure", "passed": closure_ok == config.trials, "value": closure_ok,
                 "bound": 2 ** (t + 1) * constant})
    rows.append({"check": "l2", "passed": l2_ok == config.trials, "value": l2_ok, "bound": constant})
    return rows


def run_cs_lemma(config, density, executor, bus):
    model = density.model
    rng = np.random.default_rng(config.seed)
    rows, violations = [], 0
    for i in range(config.trials):
        gamma = random_element(model, int(rng.integers(7)), rng)
        xi = StepFunction.random(density, config.depth, rng)
        eta = StepFunction.random(density, config.depth, rng)
        try:
            report = check_cs_poisson(density, gamma, xi, eta)
            rows.append({"trial": i, "gamma": str(gamma), "left": report.left, "right": report.right,
                         "slack": report.slack})
        except EstimateViolationError as error:
            violations += 1
            rows.append({"trial": i, "gamma": str(gamma), "left": math.nan, "right": math.nan,
                         "slack": math.nan})
            print(f"cs-lemma: {error}", file=sys.stderr)
    bus.publish_check("cs-lemma", violations == 0, violations=violations, trials=config.trials)
    return rows


HANDLERS = {
    "hc-function": run_hc_function,
    "density": run_density,
    "fatou": run_fatou,
    "maximal": run_maximal,
    "rd-sum": run_rd_sum,
    "annulus-average": run_annulus_average,
    "equidistribution": run_equidistribution,
    "schwartz": run_schwartz,
    "cs-lemma": run_cs_lemma,
}


# -- reports -------------------------------------------------------------------

def _jsonable(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"Not serializable: {value!r}")


def write_report(config, rows, records, density):
    if config.format == "csv":
        body = pd.DataFrame(rows).to_csv(index=False, float_format="%.12g")
        if config.timestamp:
            body = f"# generated: {datetime.datetime.now().isoformat()}\n" + body
    else:
        document = {"schema_version": SCHEMA_VERSION, "command": config.command,
                    "provenance": provenance(density),
                    "checks": [{"check_id": cid, **record}
                               for cid, record in records.get_check_records().items()],
                    "rows": rows, "passed": records.all_passed}
        if config.timestamp:
            document["generated"] = datetime.datetime.now().isoformat()
        body = json.dumps(document, indent=2, sort_keys=True, default=_jsonable) + "\n"
    if config.out:
        with open(config.out, "w") as file:
            file.write(body)
    else:
        sys.stdout.write(body)


def run(config):
    """
    Executes the configured command and writes its report. Returns the exit status:
    0 when every certified check passed, 1 otherwise.
    """
    bus = EventBus()
    records = CheckRecordsManager(bus)
    density = build_density(config)
    with make_executor(config.threads, config.printlog) as executor:
        rows = HANDLERS[config.command](config, density, executor, bus)
    write_report(config, rows, records, density)
    for check_id in records.failures():
        print(f"hyplab: check failed: {check_id}", file=sys.stderr)
    return 0 if records.all_passed else 1


# -- argument parsing ----------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values.")
    common.add_argument("--group", help="Group model, e.g. free:2 or zfp:2,3.")
    common.add_argument("--density", choices=DENSITY_KINDS, help="Density backend.")
    common.add_argument("--depth", type=int, help="Resolution depth of test functions.")
    common.add_argument("--max-depth", type=int, help="Deepest resolvable cylinder.")
    common.add_argument("--seed", type=int, help="Seed of every pseudo-random test vector.")
    common.add_argument("--threads", type=int, help="Worker threads.")
    common.add_argument("--cap", type=int, help="Enumeration cap.")
    common.add_argument("--out", help="Output path (stdout when omitted).")
    common.add_argument("--format", choices=FORMATS, help="Report format.")
    common.add_argument("--epsilon", type=float, help="Visual metric parameter in (0, 1].")
    common.add_argument("--printlog", action="store_true", default=None, help="Print progress lines.")
    common.add_argument("--timestamp", action="store_true", default=None,
                        help="Add a generation timestamp to the report.")

    parser = argparse.ArgumentParser(prog="hyplab", description=__doc__)
    commands = parser.add_subparsers(dest="command", metavar="command")
    commands.required = True
    specific = {
        "hc-function": [("--max-n", int)],
        "density": [("--patterson-offset", float)],
        "fatou": [("--f", str, "function"), ("--v", str, "direction"), ("--aperture", float),
                  ("--max-n", int)],
        "maximal": [("--levels", int), ("--trials", int)],
        "rd-sum": [("--n", int), ("--trials", int)],
        "annulus-average": [("--n", int), ("--rho", int)],
        "equidistribution": [("--n", int), ("--rho", int), ("--f", str, "function")],
        "schwartz": [("--t", float), ("--radius", int), ("--trials", int)],
        "cs-lemma": [("--trials", int)],
    }
    for name in COMMANDS:
        sub = commands.add_parser(name, parents=[common])
        for option in specific[name]:
            flag, kind = option[0], option[1]
            dest = option[2] if len(option) > 2 else None
            if dest:
                sub.add_argument(flag, type=kind, dest=dest)
            else:
                sub.add_argument(flag, type=kind)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_values = load_config(args.config) if args.config else {}
        config = RunConfig.from_sources(args.command, file_values, flags)
        return run(config)
    except EstimateViolationError as error:
        print(f"hyplab: certification failed: {error}", file=sys.stderr)
        return 1
    except (HypLabError, ValueError, OSError) as error:
        print(f"hyplab: error: {error}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
