"""Solver configuration with environment-variable overrides."""
import dataclasses
import os

from .exceptions import ValidationError

ENV_PREFIX = "SSNPMM_"


def _parse_bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"cannot interpret {text!r} as a boolean")


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    """All knobs of one solve.

    Every field can be overridden through ``SSNPMM_<FIELD>`` (upper case) by
    :meth:`from_env`.
    """

    tol: float = 1e-5
    max_pmm: int = 200
    max_ssn_per_subproblem: int = 8
    minres_maxit: int = 200
    warmstart: bool = True
    warmstart_tol: float = 1e-3
    warmstart_maxit: int = 400
    beta0: float = 1e2
    rho0: float = 5e2
    beta_max: float = 1e10
    tau_min: float = 1e-6
    delta0: float = 1.0
    seed: int = 0

    def __post_init__(self):
        for name in ("tol", "warmstart_tol", "beta0", "rho0", "beta_max", "tau_min", "delta0"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be positive")
        for name in ("max_pmm", "max_ssn_per_subproblem", "minres_maxit"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be a positive integer")
        if int(self.warmstart_maxit) < 0:
            raise ValidationError("warmstart_maxit must be nonnegative")
        if self.beta0 > self.beta_max:
            raise ValidationError("beta0 exceeds beta_max")

    @classmethod
    def from_env(cls, environ=None, **overrides):
        """Build a config from defaults, then ``SSNPMM_*`` variables, then ``overrides``."""
        environ = os.environ if environ is None else environ
        values = {}
        for field in dataclasses.fields(cls):
            raw = environ.get(ENV_PREFIX + field.name.upper())
            if raw is None:
                continue
            kind = type(field.default)
            try:
                values[field.name] = _parse_bool(raw) if kind is bool else kind(raw)
            except ValueError:
                raise ValidationError(
                    f"{ENV_PREFIX}{field.name.upper()}={raw!r} is not a valid {kind.__name__}"
                ) from None
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)
