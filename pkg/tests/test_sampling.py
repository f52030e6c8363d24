"""Samplers against moment and distributional oracles: quadrature cdfs for
the modular laws, moment checks for the sphere and CES draws, mixture counts
for contamination, and bit-level reproducibility."""

import math
import struct
from dataclasses import dataclass

import numpy as np
import pytest
from scipy import integrate, stats

from shapekit import (
    CesModel,
    ComplexT,
    ContaminationConfig,
    DataError,
    DomainError,
    GeneralizedGaussian,
    RngStream,
    build_outlier_dataset,
    dump_dataset,
    gg_scale_for_power,
    herm_inv_sqrt,
    herm_sqrt,
    load_dataset,
    sample_ces,
    sample_contaminated,
    sample_modular,
    sample_sphere,
    toeplitz_scatter,
)

from oracles import (
    complex_t_log_density,
    gg_log_density,
    grid_cdf,
    ks_critical_1pct,
    ks_statistic,
)

N = 8
RHO = 0.8 * np.exp(2j * np.pi / 5.0)


@dataclass(frozen=True)
class _ConstantLaw:
    """Degenerate modular law: every draw equals ``value`` (test stub)."""

    dim: int
    value: float

    def sample(self, rng, size=None):
        gen = rng.generator if isinstance(rng, RngStream) else rng
        gen.random(size if size is not None else 1)  # consume, like a real law
        return self.value if size is None else np.full(size, self.value)


class TestToeplitzScatter:
    def test_zero_rho_is_identity(self):
        assert np.array_equal(toeplitz_scatter(0.0, 4), np.eye(4))

    def test_reference_entries(self):
        scatter = toeplitz_scatter(RHO, N)
        assert scatter[0, 1] == pytest.approx(RHO, rel=1e-15)
        assert scatter[1, 0] == pytest.approx(np.conj(RHO), rel=1e-15)
        assert scatter[0, 0] == 1.0
        assert scatter[2, 5] == pytest.approx(RHO**3, rel=1e-14)

    def test_hermitian_positive_definite(self):
        scatter = toeplitz_scatter(RHO, N)
        assert np.array_equal(scatter, scatter.conj().T)
        assert np.linalg.eigvalsh(scatter)[0] > 0.0

    def test_domain(self):
        with pytest.raises(DomainError):
            toeplitz_scatter(1.0, 4)
        with pytest.raises(DomainError):
            toeplitz_scatter(1.2 * np.exp(1j), 4)


class TestSampleSphere:
    def test_scalar_case(self):
        u = sample_sphere(1, RngStream(0))
        assert abs(abs(u[0]) - 1.0) <= 1e-14

    def test_unit_norms(self):
        u = sample_sphere(N, RngStream(1), size=1000)
        assert np.max(np.abs(np.linalg.norm(u, axis=1) - 1.0)) <= 1e-14

    def test_second_moment(self):
        # E[u u^H] = I/N, entrywise within three empirical standard errors.
        draws = 100_000
        u = sample_sphere(N, RngStream(2), size=draws)
        mean = u.T @ u.conj() / draws
        second = (np.abs(u) ** 2).T @ (np.abs(u) ** 2) / draws
        stderr = np.sqrt(np.maximum(second - np.abs(mean) ** 2, 0.0) / draws)
        target = np.eye(N) / N
        assert np.all(np.abs(mean - target) <= 3.0 * stderr + 1e-12)

    def test_rotation_invariance(self):
        # With identity scatter, rotating the data must not change the law;
        # compare a projection statistic across rotated / unrotated draws.
        law = ComplexT.from_power(N, 2.0, 4.0)
        z = sample_ces(np.eye(N), law, RngStream(3), size=20_000)
        q, _ = np.linalg.qr(
            np.random.default_rng(7).standard_normal((N, N))
            + 1j * np.random.default_rng(8).standard_normal((N, N))
        )
        rotated = z @ q.T
        stat = lambda w: np.abs(w[:, 0]) ** 2 / (np.abs(w) ** 2).sum(axis=1)
        assert stats.ks_2samp(stat(z), stat(rotated)).pvalue > 0.01


class TestModularLaws:
    def test_complex_t_mean(self):
        # E[Q] = N * power; at tail=2 the rate is 0.5 for power 4.
        law = ComplexT.from_power(N, 2.0, 4.0)
        assert law.scale == pytest.approx(0.5, rel=1e-15)
        q = sample_modular(law, RngStream(4), size=1_000_000)
        stderr = q.std(ddof=1) / math.sqrt(q.size)
        assert abs(q.mean() - 32.0) <= 3.0 * stderr

    def test_complex_t_quadrature_mean(self):
        # Cross-check E[Q] by quadrature of t * density.
        law = ComplexT.from_power(N, 2.0, 4.0)
        dens = lambda t: np.exp(complex_t_log_density(t, N, law.tail, law.scale))
        norm, _ = integrate.quad(dens, 0.0, np.inf, limit=400)
        mean, _ = integrate.quad(lambda t: t * dens(t), 0.0, np.inf, limit=400)
        assert mean / norm == pytest.approx(32.0, rel=1e-8)

    def test_gg_shape_one_is_plain_gamma(self):
        law = GeneralizedGaussian(N, 1.0, 2.5)
        q = sample_modular(law, RngStream(5), size=1000)
        reference = 2.5 * RngStream(5).generator.standard_gamma(N, size=1000)
        assert np.array_equal(q, reference)

    def test_complex_t_gaussian_limit(self):
        # As tail -> inf at fixed power, Q approaches Gamma(N, power).
        law = ComplexT.from_power(N, 1e4, 4.0)
        q = np.sort(sample_modular(law, RngStream(6), size=100_000))
        gap = ks_statistic(q, stats.gamma.cdf(q, a=N, scale=4.0))
        assert gap <= 0.01

    @pytest.mark.parametrize(
        "law, log_density, t_max",
        [
            (
                ComplexT.from_power(N, 2.0, 4.0),
                lambda t: complex_t_log_density(t, N, 2.0, 0.5),
                2e6,
            ),
            (
                GeneralizedGaussian(N, 0.5, 2.0),
                lambda t: gg_log_density(t, N, 0.5, 2.0),
                3e4,
            ),
        ],
        ids=["complex_t", "generalized_gaussian"],
    )
    def test_sampler_matches_quadrature_cdf(self, law, log_density, t_max):
        draws = 100_000
        q = np.sort(sample_modular(law, RngStream(7), size=draws))
        grid, cdf = grid_cdf(log_density, t_max)
        assert q[-1] < grid[-1]
        gap = ks_statistic(q, np.interp(q, grid, cdf))
        assert gap <= ks_critical_1pct(draws)

    def test_parameter_validation(self):
        with pytest.raises(DomainError):
            ComplexT(N, 1.0, 0.5)
        with pytest.raises(DomainError):
            GeneralizedGaussian(N, -0.1, 1.0)
        with pytest.raises(DomainError):
            ComplexT.from_power(N, 2.0, 0.0)


class TestGgScaleForPower:
    def test_shape_one_reduces_to_power(self):
        for dim in (2, 8, 13):
            assert gg_scale_for_power(4.0, 1.0, dim) == pytest.approx(4.0, rel=1e-12)

    def test_quadrature_power_match(self):
        # The returned scale makes E[Q] = N * power for s = 0.1 as well.
        b = gg_scale_for_power(4.0, 0.1, N)
        # E[Q] = integral of (b w)^(1/s) Gamma(N/s) weight, via substitution
        # w = t^s / b; integrand coded independently of the package.
        s = 0.1
        a = N / s

        def integrand(w):
            return math.exp(
                math.log(b * w) / s + (a - 1.0) * math.log(w) - w - math.lgamma(a)
            )

        mean, _ = integrate.quad(integrand, 0.0, 300.0, limit=500)
        assert mean == pytest.approx(N * 4.0, rel=1e-6)

    def test_monte_carlo_round_trip(self):
        b = gg_scale_for_power(4.0, 0.1, N)
        law = GeneralizedGaussian(N, 0.1, b)
        q = sample_modular(law, RngStream(8), size=1_000_000)
        stderr = q.std(ddof=1) / math.sqrt(q.size)
        assert abs(q.mean() / N - 4.0) <= 3.0 * stderr / N


class TestSampleCes:
    def test_identity_scatter_covariance(self):
        # E[z z^H] = power * I at tail=2, power=4, within three empirical
        # standard errors (heavy-tailed, so the bound is the self-normalized one).
        law = ComplexT.from_power(N, 2.0, 4.0)
        draws_total = 1_000_000
        batch = 100_000
        mean = np.zeros((N, N), dtype=complex)
        second = np.zeros((N, N))
        gen = RngStream(9).generator
        for _ in range(draws_total // batch):
            z = sample_ces(np.eye(N), law, gen, size=batch)
            mean += z.T @ z.conj() / draws_total
            mod2 = np.abs(z) ** 2
            second += mod2.T @ mod2 / draws_total
        stderr = np.sqrt(np.maximum(second - np.abs(mean) ** 2, 0.0) / draws_total)
        assert np.all(np.abs(mean - 4.0 * np.eye(N)) <= 3.0 * stderr + 1e-9)

    def test_degenerate_law_lands_on_ellipsoid(self):
        scatter = toeplitz_scatter(RHO, N)
        z = sample_ces(herm_sqrt(scatter), _ConstantLaw(N, 9.0), RngStream(10), size=200)
        w = herm_inv_sqrt(scatter)
        quad = (np.abs(z @ w.T) ** 2).sum(axis=1)
        assert np.max(np.abs(quad - 9.0)) <= 1e-10

    def test_mahalanobis_statistics_follow_modular_law(self):
        scatter = toeplitz_scatter(RHO, N)
        law = ComplexT.from_power(N, 2.0, 4.0)
        z = sample_ces(herm_sqrt(scatter), law, RngStream(11), size=100_000)
        w = herm_inv_sqrt(scatter)
        quad = (np.abs(z @ w.T) ** 2).sum(axis=1)
        grid, cdf = grid_cdf(lambda t: complex_t_log_density(t, N, 2.0, 0.5), 2e6)
        result = stats.kstest(quad, lambda x: np.interp(x, grid, cdf))
        assert result.pvalue > 0.01

    def test_dimension_mismatch(self):
        law = ComplexT.from_power(4, 2.0, 4.0)
        with pytest.raises(Exception):
            sample_ces(np.eye(8), law, RngStream(12), size=3)


class TestContamination:
    def _config(self, eps):
        nominal = CesModel(np.eye(N), _ConstantLaw(N, 1.0))
        contaminating = CesModel(np.eye(N), _ConstantLaw(N, 9.0))
        return ContaminationConfig(eps, nominal, contaminating)

    def test_pure_cases(self):
        clean = sample_contaminated(self._config(0.0), 500, RngStream(13))
        assert np.allclose(np.linalg.norm(clean, axis=1), 1.0, atol=1e-12)
        dirty = sample_contaminated(self._config(1.0), 500, RngStream(14))
        assert np.allclose(np.linalg.norm(dirty, axis=1), 3.0, atol=1e-12)

    def test_binomial_count(self):
        eps, count = 0.1, 100_000
        data = sample_contaminated(self._config(eps), count, RngStream(15))
        n_outliers = int((np.linalg.norm(data, axis=1) > 2.0).sum())
        slack = 3.0 * math.sqrt(count * eps * (1.0 - eps))
        assert abs(n_outliers - count * eps) <= slack

    def test_fraction_domain(self):
        with pytest.raises(DomainError):
            self._config(1.5)


class TestOutlierDataset:
    def test_no_outliers_is_pure_ces(self):
        nominal = CesModel(toeplitz_scatter(RHO, N), ComplexT.from_power(N, 2.0, 4.0))
        data = build_outlier_dataset(50, 0, nominal, RngStream(16))
        assert data.shape == (50, N)
        norms = np.linalg.norm(data, axis=1)
        assert np.sum(np.abs(norms - 1.0) < 1e-9) == 0

    def test_outliers_have_unit_norm(self):
        nominal = CesModel(toeplitz_scatter(RHO, N), ComplexT.from_power(N, 2.0, 4.0))
        data = build_outlier_dataset(40, 40, nominal, RngStream(17))
        norms = np.linalg.norm(data, axis=1)
        assert np.sum(np.abs(norms - 1.0) < 1e-9) == 40

    def test_counts_validated(self):
        nominal = CesModel(np.eye(N), ComplexT.from_power(N, 2.0, 4.0))
        with pytest.raises(DomainError):
            build_outlier_dataset(0, 0, nominal, RngStream(18))


class TestReproducibility:
    def test_identical_streams_bit_identical(self):
        law = ComplexT.from_power(N, 2.0, 4.0)
        scatter_sqrt = herm_sqrt(toeplitz_scatter(RHO, N))
        a = sample_ces(scatter_sqrt, law, RngStream(99, 3), size=64)
        b = sample_ces(scatter_sqrt, law, RngStream(99, 3), size=64)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        law = ComplexT.from_power(N, 2.0, 4.0)
        a = sample_ces(np.eye(N), law, RngStream(99, 0), size=16)
        b = sample_ces(np.eye(N), law, RngStream(99, 1), size=16)
        assert not np.array_equal(a, b)

    def test_stream_validation(self):
        with pytest.raises(DomainError):
            RngStream(-1)
        with pytest.raises(DomainError):
            RngStream(0, 2**64)


class TestDatasetDump:
    def test_round_trip(self, tmp_path):
        law = ComplexT.from_power(N, 2.0, 4.0)
        data = sample_ces(np.eye(N), law, RngStream(20), size=17)
        path = tmp_path / "data.cesd"
        dump_dataset(data, path)
        assert np.array_equal(load_dataset(path), data)

    def test_header_layout(self, tmp_path):
        data = np.zeros((3, 5), dtype=complex)
        path = tmp_path / "zeros.cesd"
        dump_dataset(data, path)
        raw = path.read_bytes()
        assert raw[:16] == struct.pack("<4sIII", b"CESD", 1, 5, 3)
        assert len(raw) == 16 + 3 * 5 * 16

    def test_rejects_corrupt_files(self, tmp_path):
        path = tmp_path / "bad.cesd"
        path.write_bytes(b"JUNKJUNKJUNKJUNK")
        with pytest.raises(DataError):
            load_dataset(path)
        path.write_bytes(struct.pack("<4sIII", b"CESD", 1, 4, 2) + b"\x00" * 10)
        with pytest.raises(DataError):
            load_dataset(path)
