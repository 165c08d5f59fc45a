"""Block regularisation of simultaneous binary collisions in the
collinear four-body problem.

The package provides, in layers:

* exact derived constants and the cross-binary potential (``masses``,
  ``potential``),
* coordinate charts and vector fields for the regularised flow
  (``charts``, ``fields``),
* an exact-rational resonant normal form of the collision passage with
  machine-checkable certificates (``ratpoly``, ``homological``,
  ``normalform``, ``directional``),
* transition asymptotics of the passage map, including the fractional
  power law and its coefficient (``gammafn``, ``transition``,
  ``fitting``),
* numerical integration of block-map experiments that measure the same
  law from the flow (``integrate``, ``blockmap``),
* a command-line front end (``cli``).
"""

from .masses import (
    EQUAL_MASSES,
    DerivedConstants,
    ExactConstants,
    GammaMono,
    MassParams,
    derive_constants,
)
from .potential import (
    PotentialSeries,
    potential_exact,
    potential_grad,
    potential_hess,
    potential_series,
)
from .gammafn import gamma_fn, hyp2f1_special
from .fields import (
    energy_glc,
    energy_polar,
    energy_uncoupled,
    polar_equilibria,
    vf_glc,
    vf_glc_jac,
    vf_polar,
    vf_polar_jac,
    vf_uncoupled,
    vf_uncoupled_jac,
)
from .charts import Chart, ChartError, ChartState, NormalFormFrame, chart_transform
from .normalform import (
    FamilyReport,
    KappaResult,
    NormalFormResult,
    extract_resonant_families,
    kappa_integral,
    normal_form,
    normal_form_for_masses,
)
from .directional import DirectionalCharts, NFChartMap, build_directional
from .transition import (
    hbar8,
    hbar8_closed,
    lambda_by_extrapolation,
    lambda_constant,
    predicted_block_map,
    transition_series,
)
from .fitting import (
    PowerLawFit,
    QuasiRegularFit,
    fit_power_law,
    quasi_regular_fit,
)
from .integrate import (
    IntegratorConfig,
    Section,
    SectionHit,
    SectionNotReached,
    Trajectory,
    integrate,
    integrate_to_section,
)
from .blockmap import (
    BlockMapRow,
    C0Report,
    SweepResult,
    c0_continuity_check,
    numeric_block_map,
    passage_trajectory,
    sweep_and_fit,
)

__version__ = "0.1.0"

__all__ = [
    "EQUAL_MASSES",
    "DerivedConstants",
    "ExactConstants",
    "GammaMono",
    "MassParams",
    "derive_constants",
    "PotentialSeries",
    "potential_exact",
    "potential_grad",
    "potential_hess",
    "potential_series",
    "gamma_fn",
    "hyp2f1_special",
    "energy_glc",
    "energy_polar",
    "energy_uncoupled",
    "polar_equilibria",
    "vf_glc",
    "vf_glc_jac",
    "vf_polar",
    "vf_polar_jac",
    "vf_uncoupled",
    "vf_uncoupled_jac",
    "Chart",
    "ChartError",
    "ChartState",
    "NormalFormFrame",
    "chart_transform",
    "FamilyReport",
    "KappaResult",
    "NormalFormResult",
    "extract_resonant_families",
    "kappa_integral",
    "normal_form",
    "normal_form_for_masses",
    "DirectionalCharts",
    "NFChartMap",
    "build_directional",
    "hbar8",
    "hbar8_closed",
    "lambda_by_extrapolation",
    "lambda_constant",
    "predicted_block_map",
    "transition_series",
    "PowerLawFit",
    "QuasiRegularFit",
    "fit_power_law",
    "quasi_regular_fit",
    "IntegratorConfig",
    "Section",
    "SectionHit",
    "SectionNotReached",
    "Trajectory",
    "integrate",
    "integrate_to_section",
    "BlockMapRow",
    "C0Report",
    "SweepResult",
    "c0_continuity_check",
    "numeric_block_map",
    "passage_trajectory",
    "sweep_and_fit",
    "__version__",
]
