"""Mass-transport metric on dominated measures of finite metric measure spaces.

Modules
-------
space       finite metric measure spaces and regular grids
measures    measures given by densities in [0, 1] relative to the base weights
mmetric     the metric ``d_M`` (exact max-flow solver and brute-force oracle), W1
curves      discrete curves of measures, Lipschitz certificates, decomposition
functionals mean-value functionals and their L^p norms
gradients   sampled upper gradients, gradient fields and Sobolev norms
verify      randomized invariant suites
"""

from .space import MetricSpace, new_from_matrix, new_grid
from .measures import Measure, from_density
from .mmetric import HFunction, dm, dm_solve, dm_bruteforce, w1
from .curves import Curve, translation_curve, dilation_curve, validate_curve
from .functionals import MeasureFunctional, PointFunction, lp_norm_point
from .gradients import EnsembleFactory, gradient_field, euclidean_compare

__version__ = "0.1.0"

__all__ = [
    "MetricSpace", "new_from_matrix", "new_grid",
    "Measure", "from_density",
    "HFunction", "dm", "dm_solve", "dm_bruteforce", "w1",
    "Curve", "translation_curve", "dilation_curve", "validate_curve",
    "MeasureFunctional", "PointFunction", "lp_norm_point",
    "EnsembleFactory", "gradient_field", "euclidean_compare",
]
