"""Finite-scale asymptotic dimension: covers of finite group quotients,
box spaces, extension covers and Hirsch-length bounds."""

__version__ = "0.1.0"

from .errors import CoarseLabError, ConsistencyError, ResourceError, ValidationError
from .groups import (BaumslagSolitar, FreeAbelian, GroupSpec, Lamplighter, SubgroupSpec, ball,
                     inverse, multiply, word_length)
from .quotients import (FiniteQuotient, Filtration, build_quotient, components, distance,
                        injectivity_level, product_quotient, quotient_map, r_components,
                        set_diameter, systole)
from .covers import (Cover, CoverCertificate, IntervalControl, SingleClassControl,
                     brute_force_min_cover, expand_cover, interval_cover, iterate_expand,
                     multiplicity, product_cover, pullback_cover, union_components_check,
                     verify_cover)
from .hurewicz import build_map, build_schedule, hurewicz_cover, uniform_hurewicz_family
from .boxspace import (BoxSpace, coarse_distance, nested_union_scale_check,
                       odometer_equivalence_check, translate_parameters, uniform_family_check)
from .hirsch import box_dimension_upper_bound, hirsch, parse
