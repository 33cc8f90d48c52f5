from enum import Enum
from math import comb

from pydantic import BaseModel, ConfigDict, model_validator


class OperatorKind(str, Enum):
    SIGMA = "Sigma"
    SIGMA_ROOT = "SigmaRoot"
    SIGMA_QUOTIENT = "SigmaQuotient"
    LOG_PK = "LogPk"
    PK = "Pk"
    LINEAR = "Linear"


class ConeKind(str, Enum):
    GAMMA_K = "GammaK"
    PK = "PK"
    POSITIVE_ORTHANT = "PositiveOrthant"


class ConeSpec(BaseModel):
    """Open convex symmetric cone containing the positive orthant."""

    model_config = ConfigDict(frozen=True)

    kind: ConeKind
    n: int
    k: int = 1

    @model_validator(mode="after")
    def _check(self):
        if self.n < 2:
            raise ValueError(f"cone dimension must be >= 2, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"cone index k={self.k} out of range 1..{self.n}")
        return self

    @classmethod
    def gamma(cls, k: int, n: int) -> "ConeSpec":
        return cls(kind=ConeKind.GAMMA_K, k=k, n=n)

    @classmethod
    def pk(cls, k: int, n: int) -> "ConeSpec":
        return cls(kind=ConeKind.PK, k=k, n=n)

    @classmethod
    def orthant(cls, n: int) -> "ConeSpec":
        return cls(kind=ConeKind.POSITIVE_ORTHANT, k=n, n=n)

    @property
    def label(self) -> str:
        if self.kind == ConeKind.POSITIVE_ORTHANT:
            return f"Gamma_n^+(n={self.n})"
        prefix = "Gamma" if self.kind == ConeKind.GAMMA_K else "P"
        return f"{prefix}_{self.k}(n={self.n})"


class OperatorSpec(BaseModel):
    """
    A member of the concave operator family.

    Serializes to {"kind": ..., "k": int, "l": int, "n": int}. The cone is
    derived from the kind and is not part of the wire format.
    """

    model_config = ConfigDict(frozen=True)

    kind: OperatorKind
    n: int
    k: int = 1
    l: int = 0

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            kind = data.get("kind")
            kind = kind.value if isinstance(kind, OperatorKind) else kind
            if kind == OperatorKind.LINEAR.value:
                data["k"], data["l"] = 1, 0
            elif kind != OperatorKind.SIGMA_QUOTIENT.value:
                data["l"] = 0
        return data

    @model_validator(mode="after")
    def _check(self):
        n, k, l = self.n, self.k, self.l
        if n < 2:
            raise ValueError(f"operator dimension must be >= 2, got {n}")
        if self.kind == OperatorKind.SIGMA_QUOTIENT:
            if not 0 <= l < k <= n:
                raise ValueError(f"SigmaQuotient requires 0 <= l < k <= n, got k={k}, l={l}, n={n}")
        elif not 1 <= k <= n:
            raise ValueError(f"{self.kind.value} requires 1 <= k <= n, got k={k}, n={n}")
        return self

    @property
    def cone(self) -> ConeSpec:
        if self.kind in (OperatorKind.LOG_PK, OperatorKind.PK):
            return ConeSpec.pk(self.k, self.n)
        return ConeSpec.gamma(self.k, self.n)

    @property
    def label(self) -> str:
        if self.kind == OperatorKind.LINEAR:
            return f"Linear(n={self.n})"
        if self.kind == OperatorKind.SIGMA_QUOTIENT:
            return f"SigmaQuotient(k={self.k},l={self.l},n={self.n})"
        return f"{self.kind.value}(k={self.k},n={self.n})"

    @property
    def n_subsets(self) -> int:
        return comb(self.n, self.k)

    @classmethod
    def sigma(cls, k: int, n: int) -> "OperatorSpec":
        """Plain sigma_k, evaluation only (not concave for k >= 2)."""
        return cls(kind=OperatorKind.SIGMA, k=k, n=n)

    @classmethod
    def sigma_root(cls, k: int, n: int) -> "OperatorSpec":
        return cls(kind=OperatorKind.SIGMA_ROOT, k=k, n=n)

    @classmethod
    def sigma_quotient(cls, k: int, l: int, n: int) -> "OperatorSpec":
        return cls(kind=OperatorKind.SIGMA_QUOTIENT, k=k, l=l, n=n)

    @classmethod
    def log_pk(cls, k: int, n: int) -> "OperatorSpec":
        return cls(kind=OperatorKind.LOG_PK, k=k, n=n)

    @classmethod
    def pk(cls, k: int, n: int) -> "OperatorSpec":
        return cls(kind=OperatorKind.PK, k=k, n=n)

    @classmethod
    def linear(cls, n: int) -> "OperatorSpec":
        return cls(kind=OperatorKind.LINEAR, k=1, n=n)
