"""Numerical estimates for composition operators on the minimal Mobius-invariant space."""

from .estimators import (
    blaschke_cov_check,
    blaschke_norm_bound,
    boundedness_profile,
    empirical_c0,
    essential_norm_proxy,
    lemma1_scan,
    m_norm,
    noncompact_lower_bound,
    nt_profile,
)
from .functionals import (
    angular_ratio,
    bergman_kappa,
    carleson_ratio,
    carleson_sup,
    kappa,
    omega_mass,
    split_integrals,
    stolz_bound,
)
from .quadrature import (
    QuadConfig,
    QuadResult,
    Region,
    integrate_disk,
    integrate_region,
    monte_carlo_disk,
    series_kernel_integral,
)
from .spec_io import SelfMapError, SymbolSpecError, parse_symbol
from .symbols import (
    Blaschke,
    Compose,
    Constant,
    Identity,
    Mobius,
    Polynomial,
    Product,
    evaluate,
    eval_jet,
    make_blaschke,
    make_mobius,
    validate_self_map,
    valency,
)

__version__ = "0.1.0"
