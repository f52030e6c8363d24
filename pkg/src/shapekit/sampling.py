"""Random generation for complex elliptically symmetric (CES) data models.

A CES vector is sampled through its stochastic representation
``z = sqrt(Q) * S^{1/2} u`` where ``u`` is uniform on the complex unit sphere,
``Q`` is the nonnegative modular variate whose density is proportional to
``t^(N-1) h(t)`` for the density generator ``h``, and ``S^{1/2}`` is a
Hermitian square root of the scatter matrix.

Two modular laws are implemented: the complex multivariate t (heavy tails
controlled by ``tail``) and the Generalized Gaussian (tail exponent
``shape``).  Complex Gaussian convention throughout: CN(0, 1) has real and
imaginary parts independent N(0, 1/2), so E|g|^2 = 1.

Reproducibility: every sampler takes an ``RngStream`` (or a numpy Generator);
identical (seed, stream_id) pairs reproduce draws bit for bit, and distinct
stream ids give independent streams.  A single stream must not be shared by
concurrent callers.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DataError, DimensionError, DomainError, NumericError
from .linalg import herm_sqrt
from .special import ln_gamma

__all__ = [
    "RngStream",
    "ComplexT",
    "GeneralizedGaussian",
    "ModularLaw",
    "CesModel",
    "ContaminationConfig",
    "toeplitz_scatter",
    "complex_gaussian",
    "sample_sphere",
    "sample_modular",
    "gg_scale_for_power",
    "sample_ces",
    "sample_contaminated",
    "build_outlier_dataset",
    "dump_dataset",
    "load_dataset",
]

_MAGIC = b"CESD"
_FORMAT_VERSION = 1


class RngStream:
    """Deterministic random stream keyed by (seed, stream_id)."""

    def __init__(self, seed, stream_id=0):
        for name, value in (("seed", seed), ("stream_id", stream_id)):
            if int(value) != value or not 0 <= int(value) < 2**64:
                raise DomainError(f"{name} must be an integer in [0, 2^64), got {value!r}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((self.seed, self.stream_id)))
        )

    @property
    def generator(self):
        return self._generator

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def as_generator(rng):
    """Accept an RngStream or a numpy Generator and return the Generator."""
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise DomainError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class ComplexT:
    """Modular law of the complex multivariate t distribution.

    ``tail`` (> 1) controls tail heaviness (smaller is heavier), ``scale`` is
    the rate parameter; the per-component power is tail / (scale * (tail - 1)).
    """

    dim: int
    tail: float
    scale: float

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")
        if not self.tail > 1.0:
            raise DomainError(f"tail must exceed 1, got {self.tail}")
        if not self.scale > 0.0:
            raise DomainError(f"scale must be positive, got {self.scale}")

    @classmethod
    def from_power(cls, dim, tail, power):
        """Choose the rate so the per-component power E[Q]/N equals ``power``."""
        if not power > 0.0:
            raise DomainError(f"power must be positive, got {power}")
        if not tail > 1.0:
            raise DomainError(f"tail must exceed 1, got {tail}")
        return cls(dim=dim, tail=tail, scale=tail / (power * (tail - 1.0)))

    @property
    def power(self):
        return self.tail / (self.scale * (self.tail - 1.0))

    def sample(self, rng, size=None):
        # Q = (tail/scale) * G1/G2 with G1 ~ Gamma(dim), G2 ~ Gamma(tail),
        # i.e. (dim/scale) times a Fisher(2*dim, 2*tail) variate.
        gen = as_generator(rng)
        g1 = gen.standard_gamma(self.dim, size=size)
        g2 = gen.standard_gamma(self.tail, size=size)
        return (self.tail / self.scale) * g1 / g2


@dataclass(frozen=True)
class GeneralizedGaussian:
    """Modular law of the complex Generalized Gaussian distribution.

    ``shape`` is the tail exponent (1 recovers the Gaussian case, < 1 is
    heavier than Gaussian), ``scale`` the corresponding scale parameter.
    """

    dim: int
    shape: float
    scale: float

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim}")
        if not self.shape > 0.0:
            raise DomainError(f"shape must be positive, got {self.shape}")
        if not self.scale > 0.0:
            raise DomainError(f"scale must be positive, got {self.scale}")

    def sample(self, rng, size=None):
        # Q = (scale * G)^(1/shape) with G ~ Gamma(dim/shape).
        gen = as_generator(rng)
        g = gen.standard_gamma(self.dim / self.shape, size=size)
        return (self.scale * g) ** (1.0 / self.shape)


ModularLaw = Union[ComplexT, GeneralizedGaussian]


def gg_scale_for_power(power, shape, dim):
    """Generalized-Gaussian scale matching a per-component power E[Q]/N.

    Returns b = (N * power * Gamma(N/s) / Gamma((N+1)/s))^s, evaluated in log
    space so large N/s stays finite.
    """
    if not power > 0.0 or not shape > 0.0 or dim < 1:
        raise DomainError(
            f"power, shape must be positive and dim >= 1, got {power}, {shape}, {dim}"
        )
    log_b = shape * (
        np.log(dim * power) + ln_gamma(dim / shape) - ln_gamma((dim + 1) / shape)
    )
    return float(np.exp(log_b))


def toeplitz_scatter(rho, dim):
    """Hermitian Toeplitz scatter with entries rho^(j-i) on and above the
    diagonal (conjugates below); requires |rho| < 1 for positive definiteness.
    """
    rho = complex(rho)
    if not abs(rho) < 1.0:
        raise DomainError(f"toeplitz_scatter requires |rho| < 1, got |rho|={abs(rho)}")
    if dim < 1:
        raise DomainError(f"dim must be a positive integer, got {dim}")
    offsets = np.arange(dim)[None, :] - np.arange(dim)[:, None]  # j - i
    powers = rho ** np.abs(offsets)
    scatter = np.where(offsets >= 0, powers, powers.conj())
    if np.linalg.eigvalsh(scatter)[0] <= 0.0:
        raise NumericError(f"toeplitz scatter lost positive definiteness at rho={rho}")
    return scatter


def complex_gaussian(dim, rng, size=None):
    """CN(0, I_dim) draws: independent entries with E|g|^2 = 1."""
    gen = as_generator(rng)
    shape = (dim,) if size is None else (size, dim)
    parts = gen.standard_normal(size=shape + (2,))
    return (parts[..., 0] + 1j * parts[..., 1]) / np.sqrt(2.0)


def sample_sphere(dim, rng, size=None):
    """Uniform draws on the complex unit sphere of dimension ``dim``."""
    if dim < 1:
        raise DomainError(f"dim must be a positive integer, got {dim}")
    g = complex_gaussian(dim, rng, size=size)
    norms = np.sqrt((g.real**2 + g.imag**2).sum(axis=-1, keepdims=True))
    return g / norms


def sample_modular(law, rng, size=None):
    """Draw the nonnegative modular variate Q of a modular law."""
    return law.sample(rng, size=size)


def sample_ces(scatter_sqrt, law, rng, size=None):
    """CES draws via z = sqrt(Q) * scatter_sqrt @ u.

    ``scatter_sqrt`` is a (precomputed) Hermitian square-root factor of the
    scatter matrix.  Returns one vector or a (size, N) array of row vectors.
    """
    scatter_sqrt = np.asarray(scatter_sqrt, dtype=np.complex128)
    n = scatter_sqrt.shape[0]
    if scatter_sqrt.shape != (n, n):
        raise DimensionError(f"scatter_sqrt must be square, got {scatter_sqrt.shape}")
    if law.dim != n:
        raise DimensionError(f"law dimension {law.dim} != scatter dimension {n}")
    u = sample_sphere(n, rng, size=size)
    q = sample_modular(law, rng, size=size)
    radius = np.sqrt(q)[..., None] if size is not None else np.sqrt(q)
    return (radius * u) @ scatter_sqrt.T


@dataclass(frozen=True)
class CesModel:
    """A scatter matrix paired with the modular law of its density generator."""

    scatter: np.ndarray
    law: ModularLaw

    def __post_init__(self):
        scatter = np.asarray(self.scatter, dtype=np.complex128)
        if scatter.shape != (self.law.dim, self.law.dim):
            raise DimensionError(
                f"scatter shape {scatter.shape} does not match law dimension {self.law.dim}"
            )
        object.__setattr__(self, "scatter", scatter)


@dataclass(frozen=True)
class ContaminationConfig:
    """Mixture (1 - fraction) * nominal + fraction * contaminating."""

    fraction: float
    nominal: CesModel
    contaminating: CesModel

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise DomainError(f"fraction must lie in [0, 1], got {self.fraction}")
        if self.nominal.law.dim != self.contaminating.law.dim:
            raise DimensionError("nominal and contaminating models must share a dimension")


def sample_contaminated(config, count, rng):
    """Dataset of ``count`` rows, each independently nominal with probability
    1 - fraction or contaminating with probability fraction."""
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")
    gen = as_generator(rng)
    n = config.nominal.law.dim
    contaminated = gen.random(count) < config.fraction
    data = np.empty((count, n), dtype=np.complex128)
    n_bad = int(contaminated.sum())
    if count - n_bad:
        data[~contaminated] = sample_ces(
            herm_sqrt(config.nominal.scatter), config.nominal.law, gen, size=count - n_bad
        )
    if n_bad:
        data[contaminated] = sample_ces(
            herm_sqrt(config.contaminating.scatter),
            config.contaminating.law,
            gen,
            size=n_bad,
        )
    return data


def build_outlier_dataset(n_proper, n_outliers, nominal, rng):
    """``n_proper`` CES draws plus ``n_outliers`` unit-sphere outliers, in
    randomized order."""
    if n_proper < 0 or n_outliers < 0 or n_proper + n_outliers < 1:
        raise DomainError(
            f"need nonnegative counts summing to >= 1, got {n_proper}, {n_outliers}"
        )
    gen = as_generator(rng)
    n = nominal.law.dim
    blocks = []
    if n_proper:
        blocks.append(sample_ces(herm_sqrt(nominal.scatter), nominal.law, gen, size=n_proper))
    if n_outliers:
        blocks.append(sample_sphere(n, gen, size=n_outliers))
    data = np.vstack(blocks)
    return data[gen.permutation(n_proper + n_outliers)]


def dump_dataset(data, path):
    """Write a dataset as little-endian interleaved re/im float64 records with
    a 16-byte header: magic 'CESD', version, N, L (uint32 each)."""
    data = np.ascontiguousarray(data, dtype="<c16")
    if data.ndim != 2:
        raise DimensionError(f"dataset must be 2-D (L, N), got shape {data.shape}")
    n_obs, dim = data.shape
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIII", _MAGIC, _FORMAT_VERSION, dim, n_obs))
        fh.write(data.tobytes())


def load_dataset(path):
    """Inverse of :func:`dump_dataset`."""
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise DataError(f"{path}: truncated header")
        magic, version, dim, n_obs = struct.unpack("<4sIII", header)
        if magic != _MAGIC:
            raise DataError(f"{path}: bad magic {magic!r}")
        if version != _FORMAT_VERSION:
            raise DataError(f"{path}: unsupported version {version}")
        payload = fh.read()
    expected = 16 * dim * n_obs
    if len(payload) != expected:
        raise DataError(f"{path}: expected {expected} payload bytes, found {len(payload)}")
    flat = np.frombuffer(payload, dtype="<c16")
    return flat.reshape(n_obs, dim).astype(np.complex128)
