"""Basis, Hamiltonian assembly, disorder streams, and kick kernel."""

import math

import numpy as np
import pytest

import kickedchain as kc
from kickedchain import reference as ref
from kickedchain.errors import CapacityError, DimensionError


def random_params(rng, N=None):
    N = N if N is not None else int(rng.integers(2, 7))
    return kc.ChainParams(
        N=N,
        J1=float(rng.normal()),
        J2=float(rng.normal()),
        D=float(rng.normal()),
        h=float(rng.uniform(0, 7)),
        phi=float(rng.uniform(0, math.pi)),
    )


class TestBasis:
    def test_sector_sizes_n2(self):
        b = kc.build_basis(2)
        assert [b.sector_size(k) for k in range(3)] == [1, 2, 1]

    def test_sector_sizes_n4(self):
        assert kc.build_basis(4).sector_size(2) == 6

    def test_sector_sizes_n8(self):
        b = kc.build_basis(8)
        assert b.dimension == 256
        assert max(b.sector_size(k) for k in range(9)) == 70

    @pytest.mark.parametrize("N", [2, 3, 5, 8])
    def test_sizes_sum_and_binomials(self, N):
        b = kc.build_basis(N)
        sizes = [b.sector_size(k) for k in range(N + 1)]
        assert sizes == [math.comb(N, k) for k in range(N + 1)]
        assert sum(sizes) == 2**N

    @pytest.mark.parametrize("N", [2, 4, 6])
    def test_lookup_bijection(self, N):
        b = kc.build_basis(N)
        seen = np.zeros(b.dimension, dtype=bool)
        for k, sec in enumerate(b.states_by_sector):
            for pos, s in enumerate(sec):
                assert b.sector_of[s] == k
                assert b.position_of[s] == pos
                assert not seen[s]
                seen[s] = True
        assert seen.all()

    @pytest.mark.parametrize("N", [0, -3, kc.MAX_SITES + 1])
    def test_capacity_error(self, N):
        with pytest.raises(CapacityError):
            kc.build_basis(N)


class TestDisorder:
    def test_fields_within_range(self):
        for idx in range(20):
            d = kc.DisorderRealization.draw(3.5, 10, seed=99, index=idx)
            assert np.all(np.abs(d.fields) <= 3.5)

    def test_bit_for_bit_regeneration(self):
        a = kc.DisorderRealization.draw(7.0, 12, seed=2024, index=5)
        b = kc.DisorderRealization.draw(7.0, 12, seed=2024, index=5)
        assert np.array_equal(a.fields, b.fields)

    def test_streams_differ_across_indices(self):
        a = kc.DisorderRealization.draw(1.0, 8, seed=1, index=0)
        b = kc.DisorderRealization.draw(1.0, 8, seed=1, index=1)
        assert not np.array_equal(a.fields, b.fields)

    def test_order_independence(self):
        late = kc.DisorderRealization.draw(2.0, 6, seed=5, index=100)
        # drawing other indices first must not shift index 100
        for idx in (3, 77, 0):
            kc.DisorderRealization.draw(2.0, 6, seed=5, index=idx)
        again = kc.DisorderRealization.draw(2.0, 6, seed=5, index=100)
        assert np.array_equal(late.fields, again.fields)

    def test_stream_pairwise_correlation(self):
        R, N = 1000, 6
        draws = np.stack(
            [kc.DisorderRealization.draw(1.0, N, seed=31, index=r).fields for r in range(R)]
        )
        for i in range(N):
            for j in range(i + 1, N):
                corr = np.corrcoef(draws[:, i], draws[:, j])[0, 1]
                assert abs(corr) < 0.1
        # adjacent realizations uncorrelated site-by-site as well
        corr = np.corrcoef(draws[:-1, 0], draws[1:, 0])[0, 1]
        assert abs(corr) < 0.1


class TestChainParams:
    def test_serialization_round_trip(self):
        p = kc.ChainParams(N=7, J1=-1.0, J2=0.3, D=0.123456789012345, h=6.5, phi=3.05, T=0.7)
        assert kc.ChainParams.from_dict(p.to_dict()) == p

    @pytest.mark.parametrize(
        "kwargs", [{"N": 0}, {"N": 4, "T": 0.0}, {"N": 4, "h": -1.0}, {"N": 4, "boundary": "periodic"}]
    )
    def test_invalid_params(self, kwargs):
        with pytest.raises(ValueError):
            kc.ChainParams(**kwargs)


class TestHamiltonian:
    def test_n2_singlet_triplet(self):
        p = kc.ChainParams(N=2, J1=1.0, J2=0.0, D=0.0, h=0.0)
        d = kc.DisorderRealization(fields=np.zeros(2), seed=0, index=0)
        basis = kc.build_basis(2)
        H = kc.embed_sectors(kc.build_hamiltonian(p, d, basis), basis)
        assert np.allclose(np.sort(np.linalg.eigvalsh(H)), [-0.75, 0.25, 0.25, 0.25], atol=1e-14)

    def test_zeeman_diagonal(self):
        p = kc.ChainParams(N=2, J1=0.0, J2=0.0, D=0.0, h=1.0)
        d = kc.DisorderRealization(fields=np.array([0.4, -0.9]), seed=0, index=0)
        basis = kc.build_basis(2)
        H = kc.embed_sectors(kc.build_hamiltonian(p, d, basis), basis)
        up_up = 0b11
        assert H[up_up, up_up] == pytest.approx(-(0.4 - 0.9) / 2, abs=1e-15)

    def test_n3_full_spectrum_vs_kron_oracle(self):
        p = kc.ChainParams(N=3, J1=-1.0, J2=0.25, D=0.5, h=2.0)
        d = kc.DisorderRealization.draw(p.h, 3, seed=7, index=0)
        basis = kc.build_basis(3)
        H = kc.embed_sectors(kc.build_hamiltonian(p, d, basis), basis)
        H_ref = ref.dense_hamiltonian(p, d)
        assert np.abs(H - H_ref).max() < 1e-12
        assert np.allclose(
            np.linalg.eigvalsh(H), np.linalg.eigvalsh(H_ref), atol=1e-12
        )

    @pytest.mark.parametrize("trial", range(8))
    def test_sector_equals_dense_random(self, trial):
        rng = np.random.default_rng(1000 + trial)
        p = random_params(rng)
        d = kc.DisorderRealization.draw(p.h, p.N, seed=trial, index=0)
        basis = kc.build_basis(p.N)
        H = kc.embed_sectors(kc.build_hamiltonian(p, d, basis), basis)
        assert np.abs(H - ref.dense_hamiltonian(p, d)).max() < 1e-12

    @pytest.mark.parametrize("trial", range(4))
    def test_total_sz_commutes(self, trial):
        rng = np.random.default_rng(2000 + trial)
        p = random_params(rng)
        d = kc.DisorderRealization.draw(p.h, p.N, seed=trial, index=1)
        H = ref.dense_hamiltonian(p, d)
        Z = ref.dense_total_sz(p.N)
        assert np.abs(H @ Z - Z @ H).max() <= 1e-12

    def test_hermiticity(self):
        rng = np.random.default_rng(3)
        p = random_params(rng, N=6)
        d = kc.DisorderRealization.draw(p.h, 6, seed=9, index=0)
        for s in kc.build_hamiltonian(p, d, kc.build_basis(6)):
            assert np.abs(s.matrix - s.matrix.conj().T).max() <= 1e-12

    def test_d_zero_blocks_are_real(self):
        p = kc.ChainParams(N=5, J1=-1.0, J2=0.25, D=0.0, h=3.0)
        d = kc.DisorderRealization.draw(p.h, 5, seed=4, index=0)
        for s in kc.build_hamiltonian(p, d, kc.build_basis(5)):
            assert not np.iscomplexobj(s.matrix)

    def test_field_length_mismatch(self):
        p = kc.ChainParams(N=4)
        d = kc.DisorderRealization(fields=np.zeros(3), seed=0, index=0)
        with pytest.raises(DimensionError):
            kc.build_hamiltonian(p, d, kc.build_basis(4))


class TestKick:
    def test_phi_zero_is_identity(self):
        rng = np.random.default_rng(8)
        v = rng.normal(size=16) + 1j * rng.normal(size=16)
        v /= np.linalg.norm(v)
        out = kc.kick_state(v, 4, 0.0)
        assert np.abs(out - v).max() < 1e-15

    @pytest.mark.parametrize("N", [1, 3, 5])
    def test_phi_pi_flips_all(self, N):
        state = kc.prepare_initial_state(N, np.zeros(N))
        out = kc.apply_kick(state, math.pi)
        expected = np.zeros(2**N, dtype=complex)
        expected[0] = (-1j) ** N  # all-down basis state with the global phase
        assert np.abs(out.amplitudes - expected).max() < 1e-12

    def test_half_pi_single_spin(self):
        up = kc.prepare_initial_state(1, [0.0])
        out = kc.apply_kick(up, math.pi / 2)
        expected = np.array([-1j, 1.0]) / math.sqrt(2)  # (|up> - i|down>)/sqrt2
        assert np.abs(out.amplitudes - expected).max() < 1e-12

    def test_norm_preserved_and_composition(self):
        rng = np.random.default_rng(21)
        v = rng.normal(size=64) + 1j * rng.normal(size=64)
        v /= np.linalg.norm(v)
        for phi1, phi2 in [(0.3, 1.1), (2.9, -0.4), (math.pi, math.pi)]:
            a = kc.kick_state(kc.kick_state(v, 6, phi1), 6, phi2)
            b = kc.kick_state(v, 6, phi1 + phi2)
            assert abs(np.linalg.norm(a) - 1.0) <= 1e-12
            assert np.linalg.norm(a - b) <= 1e-12

    def test_matches_dense_expm(self):
        rng = np.random.default_rng(5)
        v = rng.normal(size=32) + 1j * rng.normal(size=32)
        v /= np.linalg.norm(v)
        U = ref.dense_kick(5, 1.234)
        assert np.linalg.norm(kc.kick_state(v, 5, 1.234) - U @ v) < 1e-12
