"""Tests for the OTFS domain transforms."""
import numpy as np
import pytest

from otfs_array.exceptions import SizeError
from otfs_array.models import DDFrame, FTFrame, TimeSignal
from otfs_array.selftest import random_frame
from otfs_array.transforms import (
    add_cp,
    heisenberg,
    isfft,
    remove_cp,
    sfft,
    to_delay_doppler,
    wigner,
)


class TestSymplecticTransforms:
    """Test ISFFT and SFFT."""

    def test_inverse_pair(self, dd_frame):
        """Test that SFFT undoes ISFFT."""
        np.testing.assert_allclose(sfft(isfft(dd_frame)).grid, dd_frame.grid, atol=1e-12)

    def test_unitary(self, dd_frame):
        """Test that ISFFT preserves energy."""
        assert isfft(dd_frame).energy() == pytest.approx(dd_frame.energy())

    def test_impulse_spreads_evenly(self, desk_params):
        """Test that a delay-Doppler impulse at the origin is flat in frequency-time."""
        grid = np.zeros(desk_params.shape, dtype=complex)
        grid[0, 0] = 1.0
        s = isfft(DDFrame(grid))
        np.testing.assert_allclose(np.abs(s.grid), 1 / np.sqrt(desk_params.size))

    def test_stack_matches_single_grids(self, rng, desk_params):
        """Test that a stacked transform equals the per-antenna transforms."""
        stack = DDFrame(random_frame(rng, (3, *desk_params.shape)))
        result = isfft(stack)
        for index in range(3):
            np.testing.assert_allclose(result.grid[index], isfft(stack.antenna(index)).grid)


class TestMulticarrier:
    """Test Heisenberg and Wigner."""

    def test_length_and_prefix(self, dd_frame, desk_params):
        """Test the prefix copies the body tail."""
        s = heisenberg(isfft(dd_frame), desk_params)
        assert s.cp_len == desk_params.cp_len
        assert s.samples.size == desk_params.size + desk_params.cp_len
        np.testing.assert_array_equal(s.samples[: s.cp_len], s.samples[-s.cp_len:])

    def test_body_order(self, desk_params):
        """Test that time slot n occupies samples n*M to n*M + M - 1."""
        grid = np.zeros(desk_params.shape, dtype=complex)
        grid[:, 5] = 1.0
        body = remove_cp(heisenberg(FTFrame(grid), desk_params)).samples
        slot = slice(5 * desk_params.M, 6 * desk_params.M)
        assert np.abs(body[slot]).sum() > 0
        assert np.abs(np.delete(body, np.arange(slot.start, slot.stop))).max() < 1e-12

    def test_chain_inverse(self, dd_frame, desk_params):
        """Test that the full chain returns the transmitted frame."""
        received = to_delay_doppler(heisenberg(isfft(dd_frame), desk_params), desk_params)
        np.testing.assert_allclose(received.grid, dd_frame.grid, atol=1e-12)

    def test_wigner_rejects_prefix(self, dd_frame, desk_params):
        """Test that Wigner needs a CP-free body."""
        with pytest.raises(SizeError):
            wigner(heisenberg(isfft(dd_frame), desk_params), desk_params)

    def test_wigner_rejects_length(self, desk_params):
        """Test that Wigner needs exactly MN samples."""
        with pytest.raises(SizeError):
            wigner(TimeSignal(np.ones(desk_params.size - 1)), desk_params)

    def test_heisenberg_rejects_shape(self, small_params, dd_frame):
        """Test that Heisenberg checks the grid shape."""
        with pytest.raises(SizeError):
            heisenberg(isfft(dd_frame), small_params)


class TestCyclicPrefix:
    """Test prefix handling."""

    def test_add_and_remove(self):
        """Test that removing the prefix returns the body."""
        body = TimeSignal(np.arange(8, dtype=complex))
        prefixed = add_cp(body, 3)
        np.testing.assert_array_equal(prefixed.samples[:3], [5, 6, 7])
        np.testing.assert_array_equal(remove_cp(prefixed).samples, body.samples)

    def test_zero_prefix(self):
        """Test that a zero prefix leaves the body unchanged."""
        body = TimeSignal(np.ones(4))
        assert add_cp(body, 0) is body

    def test_double_prefix(self):
        """Test that a signal can carry only one prefix."""
        with pytest.raises(SizeError):
            add_cp(add_cp(TimeSignal(np.ones(8)), 2), 2)

    def test_prefix_too_long(self):
        """Test that the prefix cannot exceed the body."""
        with pytest.raises(SizeError):
            add_cp(TimeSignal(np.ones(4)), 5)
