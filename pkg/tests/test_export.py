import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from subquantum.doubleslit import GridSpec, SlitConfig, sample_grid
from subquantum.export import (
    FieldGridFile,
    field_file,
    format_float,
    heatmap_levels,
    read_field_csv,
    read_pgm,
    read_table_csv,
    write_field_csv,
    write_heatmap,
    write_pgm,
    write_table_csv,
)

GRID = GridSpec(-6.0, 6.0, 65, 0.0, 4.0, 17)


@pytest.fixture(scope="module")
def fields():
    return sample_grid(SlitConfig(), GRID)


class TestNumbers:
    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_shortest_round_trip(self, x):
        assert float(format_float(x)) == x

    def test_examples(self):
        assert format_float(0.1) == "0.1" and format_float(1e-300) == "1e-300" and format_float(2) == "2.0"


class TestFieldCsv:
    def test_round_trip(self, tmp_path, fields):
        p = tmp_path / "f.csv"
        written = write_field_csv(p, fields, "J_x", "abc123")
        back = read_field_csv(p)
        assert back == written
        assert back.units == "1/time" and back.grid == GRID
        np.testing.assert_array_equal(back.values, fields.J_x)

    def test_header(self, fields):
        text = field_file(fields, "P_tot", "h").to_text()
        head = text.splitlines()[:5]
        assert head[0] == "# field = P_tot"
        assert head[1] == "# units = 1/length"
        assert head[2] == "# config_hash = h"
        assert head[3] == "# grid = x_min=-6.0 x_max=6.0 n_x=65 t_min=0.0 t_max=4.0 n_t=17"
        assert head[4].split(",")[:2] == ["t", "-6.0"]
        assert len(text.splitlines()) == 5 + GRID.n_t

    def test_nan_survives(self):
        g = GridSpec(0.0, 1.0, 2, 0.0, 0.0, 1)
        f = FieldGridFile("v_x", "length/time", "h", g, np.array([[np.nan, 1.5]]))
        assert FieldGridFile.from_text(f.to_text()) == f

    @given(arrays(np.float64, (3, 4), elements=st.floats(allow_nan=False, allow_infinity=False)))
    def test_any_values_round_trip(self, values):
        f = FieldGridFile("J_e", "1/time", "h", GridSpec(-1.0, 1.0, 4, 0.0, 1.0, 3), values)
        assert FieldGridFile.from_text(f.to_text()) == f

    def test_malformed(self):
        with pytest.raises(ValueError):
            FieldGridFile.from_text("# field = P_tot\nt,0\n0,1\n")


class TestTableCsv:
    def test_round_trip(self, tmp_path):
        p = tmp_path / "t.csv"
        write_table_csv(p, {"id": np.array([0, 1], dtype=np.int64), "x": [0.1, -2.5]}, {"config_hash": "h"})
        assert p.read_text().splitlines() == ["# config_hash = h", "id,x", "0,0.1", "1,-2.5"]
        header, cols = read_table_csv(p)
        assert header == {"config_hash": "h"}
        np.testing.assert_array_equal(cols["x"], [0.1, -2.5])

    def test_no_temp_files_left(self, tmp_path):
        write_table_csv(tmp_path / "t.csv", {"x": [1.0]})
        assert [q.name for q in tmp_path.iterdir()] == ["t.csv"]


class TestHeatmap:
    def test_constant_is_all_max(self):
        np.testing.assert_array_equal(heatmap_levels(np.full((3, 5), 0.7)), 65535)

    def test_linear_scaling(self):
        np.testing.assert_array_equal(heatmap_levels(np.array([[0.0, 0.5, 1.0]])), [[0, 32768, 65535]])

    def test_signed_scaling(self):
        np.testing.assert_array_equal(heatmap_levels(np.array([[-2.0, 0.0, 2.0]])), [[0, 32768, 65535]])

    def test_log_scaling(self):
        levels = heatmap_levels(np.array([[1.0, 1e-6, 1e-20]]), "log")
        np.testing.assert_array_equal(levels, [[65535, 32768, 0]])

    @pytest.mark.parametrize(
        "values,scaling",
        [(np.array([[-1.0, 1.0]]), "log"), (np.array([[np.nan, 1.0]]), "linear"), (np.ones(3), "linear"), (np.ones((2, 2)), "gamma")],
    )
    def test_rejects(self, values, scaling):
        with pytest.raises(ValueError):
            heatmap_levels(values, scaling)

    def test_pgm_round_trip(self, tmp_path, fields):
        p = tmp_path / "p.pgm"
        levels = write_heatmap(p, fields, "P_tot", "linear", "h")
        back, comments = read_pgm(p)
        assert back.shape == (GRID.n_t, GRID.n_x)
        np.testing.assert_array_equal(back, levels)
        assert "config_hash = h" in comments and "field = P_tot" in comments

    def test_pgm_header_bytes(self, tmp_path):
        p = tmp_path / "q.pgm"
        write_pgm(p, np.array([[1, 258]], dtype=np.uint16))
        assert p.read_bytes() == b"P5\n2 1\n65535\n\x00\x01\x01\x02"

    def test_pgm_needs_uint16(self, tmp_path):
        with pytest.raises(ValueError):
            write_pgm(tmp_path / "x.pgm", np.zeros((2, 2)))

    @pytest.mark.parametrize("scaling", ["linear", "log"])
    def test_symmetric_pattern_mirror_image(self, tmp_path, fields, scaling):
        levels = write_heatmap(tmp_path / "p.pgm", fields, "P_tot", scaling)
        np.testing.assert_array_equal(levels, levels[:, ::-1])

    def test_entangling_current_antimirror(self, tmp_path, fields):
        levels = write_heatmap(tmp_path / "e.pgm", fields, "J_e").astype(np.int64)
        # signed maps send J -> -J to 65535 - level, up to one rounding level
        assert np.max(np.abs(levels + levels[:, ::-1] - 65535)) <= 1
