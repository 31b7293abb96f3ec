# HypLab/dependencies.py

import math
from fractions import Fraction

import numpy as np
import pandas as pd

__all__ = [
    'math', 'Fraction', 'np', 'pd'
]
