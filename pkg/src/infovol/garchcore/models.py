"""Model specifications, parameter vectors and their constraint domains."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from ..errors import ArgumentError, DomainError
from . import _kernels as K

FAMILIES = {"GARCH": K.GARCH, "EGARCH": K.EGARCH, "CGARCH": K.CGARCH, "TGARCH": K.TGARCH}

_PARAM_NAMES = {
    "GARCH": ("mu", "omega", "alpha", "beta"),
    "EGARCH": ("mu", "omega", "alpha", "delta_e", "beta"),
    "CGARCH": ("mu", "omega", "alpha", "beta", "rho_c", "theta_c"),
    "TGARCH": ("mu", "omega", "alpha", "phi_t", "beta"),
}


@dataclass(frozen=True)
class ModelSpec:
    family: str = "GARCH"
    exogenous: bool = False
    mean_model: str = "constant"

    def __post_init__(self):
        fam = self.family.upper()
        if fam not in FAMILIES:
            raise ArgumentError(f"unknown family {self.family!r}; choose from {sorted(FAMILIES)}")
        if self.mean_model != "constant":
            raise ArgumentError("only the constant mean model is supported")
        object.__setattr__(self, "family", fam)

    @property
    def code(self) -> int:
        return FAMILIES[self.family]

    @property
    def name(self) -> str:
        return self.family + ("X" if self.exogenous else "")

    @property
    def param_names(self) -> tuple[str, ...]:
        names = _PARAM_NAMES[self.family]
        return names + ("gamma",) if self.exogenous else names

    def base(self) -> "ModelSpec":
        """The nested model without the exogenous term."""
        return replace(self, exogenous=False)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def parse(cls, name: str) -> "ModelSpec":
        """``'garch'``, ``'GARCHX'``, ``'egarchx'`` ... -> ModelSpec."""
        up = name.strip().upper()
        if up in FAMILIES:
            return cls(up, False)
        if up.endswith("X") and up[:-1] in FAMILIES:
            return cls(up[:-1], True)
        raise ArgumentError(f"unknown model {name!r}")


@dataclass(frozen=True)
class ParamVector:
    mu: float = 0.0
    omega: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float | None = None
    delta_e: float | None = None
    rho_c: float | None = None
    theta_c: float | None = None
    phi_t: float | None = None

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if v is not None:
                object.__setattr__(self, f.name, float(v))

    def values(self, spec: ModelSpec) -> np.ndarray:
        return np.array([getattr(self, n) for n in spec.param_names], dtype=float)

    @classmethod
    def from_values(cls, spec: ModelSpec, values) -> "ParamVector":
        return cls(**{n: float(v) for n, v in zip(spec.param_names, values)})

    def kernel_vector(self) -> np.ndarray:
        """Flat parameter vector in the layout the compiled kernels expect."""
        g = lambda v: 0.0 if v is None else float(v)  # noqa: E731
        return np.array([self.omega, self.alpha, self.beta, g(self.gamma), g(self.delta_e),
                         g(self.rho_c), g(self.theta_c), g(self.phi_t)], dtype=float)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}


def check_constraints(spec: ModelSpec, p: ParamVector) -> None:
    """Raise DomainError unless ``p`` lies in the domain of ``spec``."""
    missing = [n for n in spec.param_names if getattr(p, n) is None]
    if missing:
        raise DomainError(f"{spec.name} needs parameters {missing}")
    vals = [getattr(p, n) for n in spec.param_names]
    if not all(math.isfinite(v) for v in vals):
        raise DomainError("parameters must be finite")
    fam = spec.family
    bad = []
    if fam == "EGARCH":
        if not abs(p.beta) < 1:
            bad.append("|beta| < 1")
    else:
        if not p.omega > 0:
            bad.append("omega > 0")
        if not p.alpha >= 0:
            bad.append("alpha >= 0")
        if not p.beta >= 0:
            bad.append("beta >= 0")
        if fam in ("GARCH", "CGARCH") and not p.alpha + p.beta < 1:
            bad.append("alpha + beta < 1")
        if fam == "CGARCH" and not 0 < p.rho_c < 1:
            bad.append("0 < rho < 1")
        if fam == "TGARCH":
            if not p.alpha + p.phi_t >= 0:
                bad.append("alpha + phi >= 0")
            if not p.alpha + p.phi_t / 2 + p.beta < 1:
                bad.append("alpha + phi/2 + beta < 1")
        if spec.exogenous and not p.gamma >= 0:
            bad.append("gamma >= 0")
    if bad:
        raise DomainError(f"{spec.name} parameters violate: {', '.join(bad)}")


# -- unconstrained reparameterization ---------------------------------------
#
# ``scale`` = (mean, variance) of the in-sample returns.  Each transform maps
# R^k onto the interior of the constraint domain; gamma enters as a square so
# gamma = 0 (the nested model) is reachable exactly.

def _logistic(u):
    return 0.5 * (1.0 + math.tanh(0.5 * u))


def _logit(p):
    return math.log(p / (1.0 - p))


_SQRT_2_PI = math.sqrt(2.0 / math.pi)
_MU_SCALE = 0.1


def to_params(spec: ModelSpec, u, scale) -> ParamVector:
    m, v = scale
    sd = math.sqrt(v)
    mu = m + _MU_SCALE * sd * u[0]
    fam = spec.family
    g = None
    if fam == "GARCH":
        pers, share = _logistic(u[1]), _logistic(u[2])
        alpha, beta = pers * share, pers * (1.0 - share)
        omega = v * (1.0 - pers) * math.exp(u[3])
        if spec.exogenous:
            g = v * (1.0 - pers) * u[4] * u[4]
        return ParamVector(mu, omega, alpha, beta, gamma=g)
    if fam == "EGARCH":
        beta = math.tanh(u[1])
        omega = (1.0 - beta) * math.log(v) + u[2]
        if spec.exogenous:
            g = 0.1 * u[5]
        return ParamVector(mu, omega, 0.1 * u[3], beta, gamma=g, delta_e=0.1 * u[4])
    if fam == "CGARCH":
        pers, share = _logistic(u[1]), _logistic(u[2])
        alpha, beta = pers * share, pers * (1.0 - share)
        rho = _logistic(u[3])
        omega = v * (1.0 - rho) * math.exp(u[4])
        if spec.exogenous:
            g = v * (1.0 - pers) * u[6] * u[6]
        return ParamVector(mu, omega, alpha, beta, gamma=g, rho_c=rho, theta_c=0.1 * u[5])
    # TGARCH: persistence split across alpha, phi/2 and beta by a softmax
    pers = _logistic(u[1])
    w = np.exp([u[2], u[3], 0.0])
    w /= w.sum()
    alpha, phi, beta = pers * w[0], 2.0 * pers * w[1], pers * w[2]
    omega = sd * (1.0 - beta - (alpha + 0.5 * phi) * _SQRT_2_PI) * math.exp(u[4])
    if spec.exogenous:
        g = sd * (1.0 - pers) * u[5] * u[5]
    return ParamVector(mu, omega, alpha, beta, gamma=g, phi_t=phi)


def from_params(spec: ModelSpec, p: ParamVector, scale) -> np.ndarray:
    """Inverse of :func:`to_params` (``gamma`` maps to its non-negative root)."""
    m, v = scale
    sd = math.sqrt(v)
    u0 = (p.mu - m) / (_MU_SCALE * sd)
    fam = spec.family
    if fam == "GARCH":
        pers = p.alpha + p.beta
        u = [u0, _logit(pers), _logit(p.alpha / pers), math.log(p.omega / (v * (1.0 - pers)))]
        if spec.exogenous:
            u.append(math.sqrt(p.gamma / (v * (1.0 - pers))))
    elif fam == "EGARCH":
        u = [u0, math.atanh(p.beta), p.omega - (1.0 - p.beta) * math.log(v),
             p.alpha / 0.1, p.delta_e / 0.1]
        if spec.exogenous:
            u.append(p.gamma / 0.1)
    elif fam == "CGARCH":
        pers = p.alpha + p.beta
        u = [u0, _logit(pers), _logit(p.alpha / pers), _logit(p.rho_c),
             math.log(p.omega / (v * (1.0 - p.rho_c))), p.theta_c / 0.1]
        if spec.exogenous:
            u.append(math.sqrt(p.gamma / (v * (1.0 - pers))))
    else:
        half_phi = 0.5 * p.phi_t
        pers = p.alpha + half_phi + p.beta
        u = [u0, _logit(pers), math.log(p.alpha / p.beta), math.log(half_phi / p.beta),
             math.log(p.omega / (sd * (1.0 - p.beta - (p.alpha + half_phi) * _SQRT_2_PI)))]
        if spec.exogenous:
            u.append(math.sqrt(p.gamma / (sd * (1.0 - pers))))
    return np.asarray(u, dtype=float)


def default_start(spec: ModelSpec, scale) -> ParamVector:
    """Moment-based starting point: alpha=0.05, beta=0.90, omega from the sample variance."""
    m, v = scale
    sd = math.sqrt(v)
    g = 0.0 if spec.exogenous else None
    fam = spec.family
    if fam == "GARCH":
        return ParamVector(m, v * 0.05, 0.05, 0.90, gamma=g)
    if fam == "EGARCH":
        return ParamVector(m, 0.10 * math.log(v), 0.05, 0.90, gamma=g, delta_e=-0.02)
    if fam == "CGARCH":
        return ParamVector(m, v * 0.01, 0.05, 0.90, gamma=g, rho_c=0.99, theta_c=0.02)
    a, phi, b = 0.04, 0.02, 0.90
    return ParamVector(m, sd * (1.0 - b - (a + phi / 2) * _SQRT_2_PI), a, b, gamma=g, phi_t=phi)
