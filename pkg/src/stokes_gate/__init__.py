"""Irregular singular points of linear ODEs: exponential parts, certified
growth sectors, tempered solution counts and irregularity witnesses."""

from .errors import (BranchAmbiguity, CertificationFailure, DomainError, NoIrregularityWitness,
                     NonLaurentQuotient, OperatorSyntaxError, PrecisionExhausted, PreconditionError,
                     RegionOutsideSector, StepSizeUnderflow, StokesGateError, UnsupportedOperator,
                     ZeroLeadingCoefficient)
from .formal import (Classification, ExponentialPart, FormalData, classify_singularity,
                     exponential_parts, newton_polygon)
from .gaussian import GaussianRational
from .intervals import eval_enclosure
from .microsupport import Witness, char_variety, irregularity_witness, ss_Fdelta
from .operators import ScalarOperator, SystemOperator, companion_system
from .parsing import format_operator, parse_operator
from .puiseux import PuiseuxPoly
from .sectors import (SectorCertificate, base_sector, certify_sector, compute_radius,
                      refine_sector, select_sector, verify_certificate)
from .temperance import (Region, filtrant_presentation, inf_modulus, is_tempered_exp,
                         region_contains, tempered_count, cofinal_check)

__version__ = "0.1.0"
