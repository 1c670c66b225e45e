"""Probability primitives shared by the rest of the package.

Normal distribution functions, exact and large-deviation binomial tail
probabilities, seeded random streams, and multivariate normal sampling
through a cached covariance factor.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp, ndtr, ndtri

from .exceptions import DomainError

__all__ = [
    "SeededStream",
    "CovarianceFactor",
    "norm_cdf",
    "norm_sf",
    "norm_quantile",
    "binom_sf",
    "ld_binom_sf",
    "mvn_sample",
]

_U64 = (1 << 64) - 1


def _mix64(a: int, b: int) -> int:
    # Stable across platforms/processes; Python's hash() is salted so it
    # cannot be used here.
    payload = (a & _U64).to_bytes(8, "little") + (b & _U64).to_bytes(8, "little")
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class SeededStream:
    """Deterministic random stream addressed by (seed, substream_id).

    The same pair always yields the same draws regardless of thread
    schedule or platform; distinct substream ids give independent streams.

    Parameters
    ----------
    seed : int
        Master seed, a 64-bit unsigned integer.
    substream_id : int
        Position within the seed's family of streams.
    """

    seed: int
    substream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "substream_id"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
                raise DomainError(f"{name} must be an integer, got {value!r}")
            if not 0 <= int(value) <= _U64:
                raise DomainError(f"{name} must fit in an unsigned 64-bit integer")
            object.__setattr__(self, name, int(value))

    def rng(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this substream."""
        return np.random.default_rng(
            np.random.SeedSequence([self.seed, self.substream_id])
        )

    def child(self, index: int) -> "SeededStream":
        """Derive an independent substream, stable in (substream_id, index).

        Children of distinct parents never collide with probability 1 minus
        a 64-bit hash collision, so nested derivation is safe.
        """
        if not isinstance(index, (int, np.integer)) or isinstance(index, bool):
            raise DomainError(f"child index must be an integer, got {index!r}")
        if index < 0:
            raise DomainError("child index must be non-negative")
        return SeededStream(self.seed, _mix64(self.substream_id, int(index)))


@dataclass(frozen=True)
class CovarianceFactor:
    """Lower-triangular factor L of a covariance matrix, L @ L.T = cov."""

    dim: int
    lower_factor: np.ndarray

    @classmethod
    def from_covariance(cls, cov: np.ndarray) -> "CovarianceFactor":
        """Factor a symmetric positive semi-definite matrix.

        A semi-definite matrix gets a diagonal jitter escalating up to
        1e-10 * mean(diag) before factoring; anything that still fails is
        rejected as not positive semi-definite.
        """
        cov = np.asarray(cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise DomainError(f"covariance must be square, got shape {cov.shape}")
        if not np.all(np.isfinite(cov)):
            raise DomainError("covariance contains non-finite entries")
        scale = float(np.max(np.abs(cov))) if cov.size else 0.0
        if scale > 0 and float(np.max(np.abs(cov - cov.T))) > 1e-8 * scale:
            raise DomainError("covariance must be symmetric")
        dim = cov.shape[0]
        if scale == 0.0:
            return cls(dim=dim, lower_factor=np.zeros((dim, dim)))
        sym = 0.5 * (cov + cov.T)
        base = float(np.trace(sym)) / dim
        if base <= 0:
            raise DomainError("covariance is not positive semi-definite")
        for jitter in (0.0, 1e-14, 1e-13, 1e-12, 1e-11, 1e-10):
            try:
                lower = np.linalg.cholesky(sym + (jitter * base) * np.eye(dim))
            except np.linalg.LinAlgError:
                continue
            return cls(dim=dim, lower_factor=lower)
        raise DomainError("covariance is not positive semi-definite within jitter tolerance")


def _as_finite_array(name: str, x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _scalar_or_array(result: np.ndarray, like) -> float | np.ndarray:
    if np.isscalar(like) or getattr(like, "ndim", 1) == 0:
        return float(result)
    return result


def norm_cdf(z):
    """Standard normal CDF, vectorized over z."""
    arr = _as_finite_array("z", z)
    return _scalar_or_array(ndtr(arr), z)


def norm_sf(z):
    """Standard normal survival function 1 - Phi(z), vectorized over z."""
    arr = _as_finite_array("z", z)
    # ndtr(-z) keeps full relative precision in the far right tail where
    # 1 - ndtr(z) would cancel.
    return _scalar_or_array(ndtr(-arr), z)


def norm_quantile(p):
    """Standard normal quantile, the inverse of norm_cdf.

    Requires p strictly inside (0, 1).
    """
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("p must lie strictly inside (0, 1)")
    return _scalar_or_array(ndtri(arr), p)


def _check_binom_args(m, k) -> int:
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise DomainError(f"m must be an integer, got {m!r}")
    if m < 1:
        raise DomainError("m must be at least 1")
    if not math.isfinite(k):
        raise DomainError("k must be finite")
    return int(m)


def binom_sf(m, p, k):
    """Upper tail P{Binomial(m, p) >= k} for real threshold k.

    Terms are summed in log space, so the value is monotone in p and
    accurate even when the tail mass underflows a naive product.

    Parameters
    ----------
    m : int
        Number of trials, at least 1.
    p : float or array_like
        Success probability in [0, 1]; arrays are handled elementwise.
    k : float
        Threshold; the event is {count >= k}, so k <= 0 gives 1 and
        k > m gives 0.
    """
    m = _check_binom_args(m, k)
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError("p must lie in [0, 1]")
    if k <= 0:
        return _scalar_or_array(np.ones_like(arr), p)
    i_min = int(math.ceil(k))
    if i_min > m:
        return _scalar_or_array(np.zeros_like(arr), p)

    out = np.empty_like(arr)
    out[arr == 0.0] = 0.0
    out[arr == 1.0] = 1.0
    interior = (arr > 0.0) & (arr < 1.0)
    if np.any(interior):
        pi = arr[interior][..., None]
        i = np.arange(i_min, m + 1, dtype=float)
        log_comb = gammaln(m + 1.0) - gammaln(i + 1.0) - gammaln(m - i + 1.0)
        log_terms = log_comb + i * np.log(pi) + (m - i) * np.log1p(-pi)
        out[interior] = np.minimum(1.0, np.exp(logsumexp(log_terms, axis=-1)))
    return _scalar_or_array(out, p)


def ld_binom_sf(m, p, q):
    """Large-deviation upper bound exp(-m * KL(q || p)) for P{B/m >= q}.

    Returns 1 when q <= p (the mean already exceeds the threshold).
    Requires p strictly inside (0, 1); the KL divergence is undefined at
    the endpoints.
    """
    m = _check_binom_args(m, q)
    if not 0.0 < q < 1.0:
        raise DomainError("q must lie strictly inside (0, 1)")
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise DomainError("p must lie strictly inside (0, 1)")
    kl = q * (np.log(q) - np.log(arr)) + (1.0 - q) * (np.log1p(-q) - np.log1p(-arr))
    out = np.where(q <= arr, 1.0, np.exp(-m * kl))
    return _scalar_or_array(out, p)


def mvn_sample(mean, factor: CovarianceFactor, stream: SeededStream) -> np.ndarray:
    """One multivariate normal draw mean + L @ xi with xi iid standard normal."""
    mean = _as_finite_array("mean", mean)
    if mean.ndim != 1 or mean.shape[0] != factor.dim:
        raise DomainError(
            f"mean has shape {mean.shape}, factor expects dimension {factor.dim}"
        )
    xi = stream.rng().standard_normal(factor.dim)
    return mean + factor.lower_factor @ xi
