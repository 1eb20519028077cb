"""Experiment configuration: one strict JSON document per experiment.

Unknown keys are rejected everywhere. The digest of a configuration is the
SHA-256 of its canonical JSON form (sorted keys, compact separators); the
worker count and the output section do not enter it, since they cannot
change any result.

Examples:
    >>> config = ExperimentConfig.model_validate(
    ...     {
    ...         "name": "demo",
    ...         "model": {"name": "gbm"},
    ...         "scheme": {"kind": "standard", "h": 0.25, "T": 1.0},
    ...         "ensemble": {"n_paths": 10, "x0": {"center": [1.0]}},
    ...     }
    ... )
    >>> config.scheme.h
    [0.25]
    >>> len(config.digest())
    64

"""

import hashlib
import json
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from tamedlib.montecarlo.coupling import DEFAULT_H_REF, ErrorMetric, Reference
from tamedlib.montecarlo.ensemble import InitialKind
from tamedlib.scheme.config import SchemeKind
from tamedlib.scheme.projection import ProjectionVariant
from tamedlib.taming.conditions import DriftForm, TamingCondition
from tamedlib.taming.thresholds import ProjectionPurpose, RhoTildeMode

Expectation = Literal["pass", "fail"]


class StrictModel(BaseModel):
    """Base of every config section: unknown keys are errors, values are immutable."""

    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelSection(StrictModel):
    """A builtin model or comparison pair, by catalog name."""

    name: str
    params: Dict[str, float] = Field(default_factory=dict)


class LyapunovSection(StrictModel):
    """A builtin Lyapunov function; `norm-power` gets the model dimension automatically."""

    name: str = "norm-power"
    params: Dict[str, Any] = Field(default_factory=lambda: {"p": 2})


class GSection(StrictModel):
    """G(x) = coefficient·|x|^power."""

    coefficient: float = 1.0
    power: float = 2.0

    @field_validator("coefficient", "power")
    @classmethod
    def _nonnegative(cls, value: float) -> float:
        if value < 0:
            raise ValueError(f"G ≥ 0 violated: {value}")
        return value


class TamingSection(StrictModel):
    """Which taming to build and with what constants.

    Kinds:

    * none: the untamed model
    * balanced: squared-balance integrability taming (mu, beta2, C, kappa_star)
    * stability: almost-sure stability taming with α = 1/4 (mu, lam, C)
    * projected_stability: the projected balanced taming (mu, alpha, C; r from the scheme)
    * single_g: G_b = G_σ = G(x)h^α (g, alpha)
    * case_i: G_b = G(x)h^α, G_σ = √(1 + G_b) − 1 (g, alpha)
    * positivity: drift anchored at the origin (g, alpha)
    * lipschitz: λ(x)/(1 + h^α|x|^{m−1}) (degree, alpha)
    """

    kind: Literal[
        "none", "balanced", "stability", "projected_stability", "single_g", "case_i", "positivity", "lipschitz"
    ] = "none"
    mu: float = 1.0
    beta2: float = 0.25
    C: Optional[float] = None
    kappa_star: Optional[float] = None
    lam: float = 1.0
    alpha: float = 0.25
    degree: float = 1.0
    g: GSection = Field(default_factory=GSection)

    @field_validator("mu", "lam")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError(f"μ > 0 and λ > 0 violated: {value}")
        return value


class SchemeSection(StrictModel):
    """Scheme kind, step sizes and horizon.

    Attributes:
        kind: the one-step map
        h: one step size or a list of them; for strong-rate studies the levels
        T: horizon
        r: projection exponent; derived from `projection_purpose` when absent
        projection_variant: radial, componentwise or nonnegative
        projection_purpose: the rule `r` is derived from
        h_ref: fine step of the coupling lattice
    """

    kind: SchemeKind
    h: List[float]
    T: float
    r: Optional[float] = None
    projection_variant: ProjectionVariant = ProjectionVariant.radial
    projection_purpose: ProjectionPurpose = ProjectionPurpose.integrability
    h_ref: float = DEFAULT_H_REF

    @field_validator("h", mode="before")
    @classmethod
    def _listify(cls, value: Any) -> Any:
        return [value] if isinstance(value, (int, float)) else value

    @field_validator("h")
    @classmethod
    def _unit_interval(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("at least one step size is required")
        for h in value:
            if not 0 < h <= 1:
                raise ValueError(f"h ∈ (0,1] violated: h={h}")
        return value

    @field_validator("T")
    @classmethod
    def _horizon(cls, value: float) -> float:
        if not value > 0:
            raise ValueError(f"T > 0 violated: T={value}")
        return value

    @field_validator("r")
    @classmethod
    def _exponent(cls, value: Optional[float]) -> Optional[float]:
        if value is not None and not value > 0:
            raise ValueError(f"projection exponent r > 0 violated: r={value}")
        return value

    @field_validator("h_ref")
    @classmethod
    def _fine_step(cls, value: float) -> float:
        if not 0 < value <= 1:
            raise ValueError(f"h_ref ∈ (0,1] violated: h_ref={value}")
        return value


class InitialSection(StrictModel):
    """Law of X₀."""

    kind: InitialKind = InitialKind.point
    center: List[float]
    spread: float = 0.0


class EnsembleSection(StrictModel):
    """Paths, seed and initial condition.

    Attributes:
        n_paths: number of paths, at least 1
        seed: master seed in [0, 2⁶⁴)
        x0: initial condition; comparison runs take theirs from the check
        batch_size: paths per vectorised batch; default per kind of run
        workers: threads running batches; not part of the digest
    """

    n_paths: int
    seed: int = 0
    x0: Optional[InitialSection] = None
    batch_size: Optional[int] = None
    workers: Optional[int] = None

    @field_validator("n_paths")
    @classmethod
    def _paths(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"n_paths ≥ 1 violated: n_paths={value}")
        return value

    @field_validator("seed")
    @classmethod
    def _seed(cls, value: int) -> int:
        if not 0 <= value < 2**64:
            raise ValueError(f"seed ∈ [0, 2^64) violated: seed={value}")
        return value

    @field_validator("batch_size", "workers")
    @classmethod
    def _positive_count(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError(f"batch_size and workers must be ≥ 1: {value}")
        return value


class CheckBase(StrictModel):
    """Fields every check carries."""

    expect: Expectation = "pass"
    label: Optional[str] = None


class VIntegrabilityCheck(CheckBase):
    """max_k mean V ≤ e^{(ρ+ρ̃)T}(1 + E V(X₀)) + se_multiplier·SE.

    ρ̃ is computed from the Lyapunov constant c when `rho_tilde` is absent.
    """

    kind: Literal["v_integrability"]
    rho: float = 0.0
    rho_tilde: Optional[float] = None
    rho_tilde_mode: RhoTildeMode = RhoTildeMode.remark
    mu: float = 1.0
    se_multiplier: float = 3.0


class ExponentialStabilityCheck(CheckBase):
    """A fitted decay rate of a mean trace."""

    kind: Literal["exponential_stability"]
    trace: Literal["mean_V", "mean_sq_norm"] = "mean_V"
    rho: Optional[float] = None
    min_fraction_of_rho: float = 0.4
    max_slope: Optional[float] = None
    window: Tuple[float, float] = (0.2, 1.0)
    max_final_ratio: Optional[float] = None


class AsStabilityCheck(CheckBase):
    """Fraction of paths ending within ε of the origin."""

    kind: Literal["as_stability"]
    epsilon: float = 1e-3
    min_fraction: float = 0.99


class NonnegativityCheck(CheckBase):
    """Exact count of negative iterates; `threshold_mu` adds the positivity step-size note."""

    kind: Literal["nonnegativity"]
    threshold_mu: Optional[float] = None
    threshold_alpha: float = 0.0


class MomentsCheck(CheckBase):
    """sup_k E|X̄_k|^p for the listed orders; all must be finite and cover `p0` when given."""

    kind: Literal["moments"]
    orders: List[float]
    p0: Optional[float] = None


class StrongRateCheck(CheckBase):
    """Fitted strong order over the scheme's step sizes."""

    kind: Literal["strong_rate"]
    lower: float = 0.4
    upper: float = 0.6
    metric: ErrorMetric = ErrorMetric.terminal
    reference: Reference = Reference.fine


class ComparisonCheck(CheckBase):
    """Order preservation between the two models of a comparison pair."""

    kind: Literal["comparison"]
    x0_pair: Tuple[float, float] = (1.0, 1.0)
    alpha: float = 0.5
    degree: float = 1.0
    mu: Optional[float] = None


class ConditionsCheck(CheckBase):
    """A sampled taming condition at every configured step size."""

    kind: Literal["conditions"]
    condition: TamingCondition
    mu: float = 1.0
    beta1: float = 0.5
    beta2: float = 0.25
    alpha: float = 0.25
    n_samples: int = 10_000
    radius: float = 10.0


class DriftCheck(CheckBase):
    """A sampled Lyapunov drift inequality for L (or L^h when tamed)."""

    kind: Literal["drift"]
    form: DriftForm
    rho: Optional[float] = None
    n_samples: int = 10_000
    radius: float = 10.0


Check = Annotated[
    Union[
        VIntegrabilityCheck,
        ExponentialStabilityCheck,
        AsStabilityCheck,
        NonnegativityCheck,
        MomentsCheck,
        StrongRateCheck,
        ComparisonCheck,
        ConditionsCheck,
        DriftCheck,
    ],
    Field(discriminator="kind"),
]

# checks that read a simulated ensemble
ENSEMBLE_CHECKS = frozenset({"v_integrability", "exponential_stability", "as_stability", "nonnegativity", "moments"})
SAMPLED_CHECKS = frozenset({"conditions", "drift"})


class OutputSection(StrictModel):
    """Where artifacts go."""

    dir: str = "out"
    name: Optional[str] = None
    emit_gnuplot: bool = False


class ExperimentConfig(StrictModel):
    """One experiment: a model, a scheme, an ensemble and the checks to run on it."""

    name: str
    description: str = ""
    model: ModelSection
    lyapunov: LyapunovSection = Field(default_factory=LyapunovSection)
    taming: TamingSection = Field(default_factory=TamingSection)
    scheme: SchemeSection
    ensemble: EnsembleSection
    analysis: List[Check] = Field(default_factory=list)
    output: OutputSection = Field(default_factory=OutputSection)

    def __repr__(self) -> str:
        return f"<ExperimentConfig: {self.name}>"

    @property
    def artifact_name(self) -> str:
        return self.output.name or self.name

    def canonical(self) -> Dict[str, Any]:
        """Return the resolved config as JSON data, without the fields that cannot change results."""
        return self.model_dump(mode="json", exclude={"ensemble": {"workers"}, "output": True})

    def digest(self) -> str:
        """Return the SHA-256 hex digest of the canonical JSON form."""
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def with_overrides(
        self,
        seed: Optional[int] = None,
        workers: Optional[int] = None,
        out_dir: Optional[str] = None,
        emit_gnuplot: Optional[bool] = None,
    ) -> "ExperimentConfig":
        """Return a validated copy with command-line overrides applied."""
        data = self.model_dump(mode="json")
        if seed is not None:
            data["ensemble"]["seed"] = seed
        if workers is not None:
            data["ensemble"]["workers"] = workers
        if out_dir is not None:
            data["output"]["dir"] = out_dir
        if emit_gnuplot:
            data["output"]["emit_gnuplot"] = True
        return ExperimentConfig.model_validate(data)


def load_config(path: Path) -> ExperimentConfig:
    """Parse and validate the JSON experiment file at `path`."""
    with path.open(encoding="utf-8") as f:
        return ExperimentConfig.model_validate_json(f.read())
