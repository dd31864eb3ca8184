"""Weighted K-stability of log Fano pairs with torus action via rank-1 refinements."""
from .errors import KStabError
from .invariants import delta_p1, dh, lambda_fixed, s_from_zariski, s_point_p1, weighted_volume
from .series import BUILTIN_NAMES, GitClass, RefinedSeries, builtin, load_series, validate
from .verdict import Level, Verdict, complexity_one_three_points, li_p1, weighted_verdict
from .weights import Constant, Exponential, PolyExp, Tabulated, WeightSum, futaki_g, is_weight, solve_soliton, weight_family

__version__ = "0.1.0"
