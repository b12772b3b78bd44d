"""Data models for explosive-ar."""

from enum import Enum
from typing import Annotated, Any, Literal, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PlainSerializer,
    PlainValidator,
    field_validator,
    model_validator,
)

from .errors import BadH, BadSpec


def _frozen_array(value: Any, dtype: type) -> np.ndarray:
    arr = np.array(value, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _complex_pairs(arr: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.ravel(arr)]


FloatArray = Annotated[
    np.ndarray,
    PlainValidator(lambda v: _frozen_array(v, float)),
    PlainSerializer(lambda a: a.tolist(), when_used="json"),
]

ComplexArray = Annotated[
    np.ndarray,
    PlainValidator(lambda v: _frozen_array(v, complex)),
    PlainSerializer(_complex_pairs, when_used="json"),
]

NoiseFamily = Literal["gaussian", "rademacher", "uniform_centered", "student_t"]
Statistic = Literal["mean_clt_u", "mean_clt_y", "h_clt", "lse_clt", "corrected_clt"]
Direction = Literal["backward", "forward"]


class _Frozen(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


# ----- Model -----

class NoiseSpec(_Frozen):
    family: NoiseFamily = "gaussian"
    sigma2: float = 1.0
    df: Optional[float] = None

    @model_validator(mode="after")
    def _check(self) -> "NoiseSpec":
        self.check()
        return self

    def check(self) -> None:
        if not np.isfinite(self.sigma2) or self.sigma2 <= 0:
            raise BadSpec(f"sigma2 must be positive and finite, got {self.sigma2}")
        if self.family == "student_t":
            if self.df is None or self.df <= 2:
                raise BadSpec(f"student_t noise needs df > 2 for a finite variance, got {self.df}")

    @property
    def sigma(self) -> float:
        return float(np.sqrt(self.sigma2))

    def scaled(self, factor: float) -> "NoiseSpec":
        """Spec of ``factor * Z``."""
        return NoiseSpec(family=self.family, sigma2=self.sigma2 * factor**2, df=self.df)


class ModelSpec(_Frozen):
    theta: FloatArray
    noise: NoiseSpec = NoiseSpec()

    @field_validator("theta")
    @classmethod
    def _check_theta(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 1 or v.size == 0:
            raise BadSpec("theta must be a non-empty vector")
        if not np.all(np.isfinite(v)):
            raise BadSpec("theta must be finite")
        return v

    @property
    def d(self) -> int:
        return int(self.theta.size)

    @classmethod
    def of(cls, theta: Any, sigma2: float = 1.0, family: NoiseFamily = "gaussian",
           df: Optional[float] = None) -> "ModelSpec":
        return cls(theta=theta, noise=NoiseSpec(family=family, sigma2=sigma2, df=df))


# ----- Companion -----

class Region(str, Enum):
    PURELY_EXPLOSIVE = "PurelyExplosive"
    STABLE = "Stable"
    OTHER = "Other"


class SpectralReport(_Frozen):
    eigenvalues: ComplexArray
    rho: float
    rho_lower: float
    region: Region
    boundary: bool = False
    characteristic_residual: float = 0.0


class CompanionPair(_Frozen):
    theta: FloatArray
    b: FloatArray
    b_inv: FloatArray
    spectral: Optional[SpectralReport] = None

    @property
    def d(self) -> int:
        return int(self.theta.size)

    @property
    def region(self) -> Region:
        if self.spectral is None:
            raise BadSpec("companion pair has no spectral data")
        return self.spectral.region


class PhiResult(_Frozen):
    value: FloatArray
    extended: bool = False


# ----- Simulation -----

class NoiseDraw(_Frozen):
    values: FloatArray
    seed: Optional[int] = None
    spec: NoiseSpec = NoiseSpec()

    def __len__(self) -> int:
        return int(self.values.size)


class HorizonResult(_Frozen):
    k: int
    bound: float
    q: float
    contracting_power: int
    peak_norm: float = 1.0


class SimulationPath(_Frozen):
    """
    A realized path.

    ``y[i]`` holds ``Y_{y_start + i}``. Backward paths start at ``1 - d`` and
    expose states ``U_0..U_n``; forward paths start at 1 and expose ``V_1..V_n``.
    """
    theta: FloatArray
    y: FloatArray
    noise: NoiseDraw
    n: int
    direction: Direction = "backward"
    truncation_k: int = 0
    truncation_bound: float = 0.0

    @property
    def d(self) -> int:
        return int(self.theta.size)

    @property
    def y_start(self) -> int:
        return 1 - self.d if self.direction == "backward" else 1

    @property
    def state_start(self) -> int:
        return 0 if self.direction == "backward" else 1

    @property
    def z(self) -> np.ndarray:
        """Noise ``Z_1..Z_n`` aligned with the exposed path."""
        return self.noise.values[: self.n]

    @property
    def u(self) -> np.ndarray:
        """State matrix, one row per exposed state."""
        windows = np.lib.stride_tricks.sliding_window_view(self.y, self.d)
        if self.direction == "backward":
            return windows[:, ::-1]
        return windows

    def observed(self) -> np.ndarray:
        """``Y_1..Y_n``."""
        offset = 1 - self.y_start
        return self.y[offset : offset + self.n]


class ExplosiveTrajectory(_Frozen):
    mode: Literal["stationary", "custom", "zero"]
    u0: FloatArray
    scaled: FloatArray
    state_norms: FloatArray
    saturated: bool = False
    saturated_at: Optional[int] = None
    truncation_bound: float = 0.0

    @property
    def limit(self) -> np.ndarray:
        return self.scaled[-1]


class EquivalenceReport(_Frozen):
    theta: FloatArray
    theta_star: FloatArray
    n: int
    max_discrepancy: float
    forward_bound: float
    backward_bound: float
    combined_bound: float

    @property
    def within_bound(self) -> bool:
        return self.max_discrepancy <= self.combined_bound


# ----- Moments -----

class CovarianceStructure(_Frozen):
    sigma_mat: FloatArray
    gamma_mat: FloatArray
    gamma: FloatArray
    theta_star: FloatArray
    min_eig_sigma: float


class ResidualReport(_Frozen):
    yule_walker: float
    theta_star_gamma: float
    theta_star_sigma: float
    restricted_yule_walker: FloatArray
    gamma0_identity: float
    tolerance: float = 1e-9

    @property
    def passed(self) -> bool:
        worst = max(
            self.yule_walker,
            self.theta_star_gamma,
            self.theta_star_sigma,
            self.gamma0_identity,
            float(np.max(self.restricted_yule_walker, initial=0.0)),
        )
        return worst <= self.tolerance


class DefinitenessCertificate(_Frozen):
    min_eig: float
    det_stack: float
    expected_det: float


class CltMeanCovariance(_Frozen):
    u_cov: FloatArray
    y_var: float
    column: FloatArray


class CovarianceReport(_Frozen):
    theta: FloatArray
    sigma2: float
    structure: CovarianceStructure
    residuals: ResidualReport
    certificate: DefinitenessCertificate
    clt: CltMeanCovariance
    lse_cov: FloatArray
    corrected_cov: FloatArray


# ----- Estimation -----

class HSpec(_Frozen):
    """
    Regressor transform ``h``.

    ``index`` and ``coords`` are 1-based state coordinates.
    """
    kind: Literal["identity", "projection", "linear", "lse_score", "tanh", "constant"]
    index: Optional[int] = None
    matrix: Optional[list[list[float]]] = None
    coords: Optional[list[int]] = None

    @model_validator(mode="after")
    def _check(self) -> "HSpec":
        if self.kind == "projection" and (self.index is None or self.index < 1):
            raise BadH("projection needs a 1-based index")
        if self.kind == "linear":
            if not self.matrix or len({len(row) for row in self.matrix}) != 1:
                raise BadH("linear needs a non-empty rectangular matrix")
        if self.coords is not None and any(c < 1 for c in self.coords):
            raise BadH("coords are 1-based")
        return self

    @property
    def linear(self) -> bool:
        return self.kind != "tanh"


class EstimationResult(_Frozen):
    theta_hat: FloatArray
    theta_corrected: FloatArray
    corrected_extended: bool = False
    n: int
    gram_singular: bool = False
    gram_min_eig: float = 0.0
    theta_true: Optional[FloatArray] = None
    theta_star_true: Optional[FloatArray] = None
    normalized_dev_star: Optional[FloatArray] = None
    normalized_dev_theta: Optional[FloatArray] = None


# ----- Monte Carlo -----

class ExperimentConfig(_Frozen):
    spec: ModelSpec
    n: int = Field(ge=1)
    replications: int
    base_seed: int = Field(ge=0, lt=2**64)
    statistic: Statistic
    h: Optional[HSpec] = None
    # None defers to Settings.tol_cov_rel and Settings.default_tol
    tol_cov_rel: Optional[float] = Field(default=None, gt=0)
    workers: int = Field(default=1, ge=1)
    tol: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check(self) -> "ExperimentConfig":
        if self.replications < 100:
            raise BadSpec(f"replications must be >= 100, got {self.replications}")
        if self.statistic == "h_clt" and self.h is None:
            raise BadH("statistic h_clt needs an h specification")
        return self


class MonteCarloReport(_Frozen):
    statistic: Statistic
    replications: int
    failures: int
    samples: FloatArray
    empirical_mean: FloatArray
    empirical_cov: FloatArray
    target_cov: FloatArray
    cov_rel_err: float
    tol_cov_rel: float
    rank: int
    mahalanobis_ks: float
    marginal_ks: FloatArray
    ks_threshold: float
    passed: bool = Field(serialization_alias="pass")
    target_se: Optional[FloatArray] = None


class StrongLawReport(_Frozen):
    n: int
    gram_rel_err: float
    cross_rel_err: float
    orthogonality: FloatArray
    orthogonality_band: FloatArray

    @property
    def within_band(self) -> bool:
        return bool(np.all(np.abs(self.orthogonality) <= self.orthogonality_band))


class ShiftReport(_Frozen):
    mean_first: float
    mean_second: float
    var_first: float
    var_second: float
    mean_z: float
    var_z: float
    passed: bool


class TrendReport(_Frozen):
    statistic: Statistic
    ns: list[int]
    cov_rel_errs: list[float]
    slack: float
    non_increasing: bool
