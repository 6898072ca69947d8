import numpy as np
import pytest

from tlres import ComplexTrace, DomainError, ModeMeasurement
from tlres.io import (
    MODE_HEADER,
    TRACE_HEADER,
    read_mode_table,
    read_trace_csv,
    write_mode_table,
    write_table,
    write_trace_csv,
)


class TestTraceCsv:
    def test_round_trip_is_bit_exact(self, tmp_path, rng):
        f = np.sort(rng.uniform(1e9, 1e10, 500))
        z = rng.standard_normal(500) + 1j * rng.standard_normal(500)
        path = tmp_path / "t.csv"
        write_trace_csv(path, ComplexTrace(f, z))
        back = read_trace_csv(path)
        assert np.array_equal(back.freqs, f)
        assert np.array_equal(back.s21, z)

    def test_header(self, tmp_path):
        path = tmp_path / "t.csv"
        write_trace_csv(path, ComplexTrace(np.array([1.0, 2.0]), np.array([1j, 1.0])))
        assert path.read_text().splitlines()[0] == "freq_hz,re_s21,im_s21"
        assert TRACE_HEADER == ("freq_hz", "re_s21", "im_s21")

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("f,re,im\n1,2,3\n")
        with pytest.raises(DomainError, match="expected header"):
            read_trace_csv(path)

    def test_bad_number_reports_line(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("freq_hz,re_s21,im_s21\n1e9,1,0\n2e9,abc,0\n")
        with pytest.raises(DomainError, match=r"t\.csv:3"):
            read_trace_csv(path)

    def test_short_row_reports_line(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("freq_hz,re_s21,im_s21\n1e9,1\n")
        with pytest.raises(DomainError, match=r"t\.csv:2"):
            read_trace_csv(path)

    def test_empty_and_header_only(self, tmp_path):
        empty = tmp_path / "e.csv"
        empty.write_text("")
        with pytest.raises(DomainError):
            read_trace_csv(empty)
        header = tmp_path / "h.csv"
        header.write_text("freq_hz,re_s21,im_s21\n")
        with pytest.raises(DomainError):
            read_trace_csv(header)

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("freq_hz,re_s21,im_s21\n1e9,1,0\n\n2e9,0.5,0.5\n")
        assert len(read_trace_csv(path)) == 2


class TestModeTable:
    def test_round_trip_with_missing_q(self, tmp_path):
        modes = [ModeMeasurement(1, 3.41e9, 2.103e5), ModeMeasurement(2, 6.927e9)]
        path = tmp_path / "m.csv"
        write_mode_table(path, modes)
        back = read_mode_table(path)
        assert [(m.mode_n, m.f_r, m.q_i) for m in back] == [(1, 3.41e9, 2.103e5), (2, 6.927e9, None)]
        assert path.read_text().splitlines()[0] == ",".join(MODE_HEADER)

    def test_fractional_mode(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("mode_n,f_r_hz,q_i\n1.5,3e9,\n")
        with pytest.raises(DomainError, match=r"m\.csv:2"):
            read_mode_table(path)

    def test_invalid_value(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("mode_n,f_r_hz,q_i\n1,-3e9,\n")
        with pytest.raises(DomainError):
            read_mode_table(path)


class TestWriteTable:
    def test_columns_and_floats(self, tmp_path):
        path = tmp_path / "sub" / "r.csv"
        write_table(path, [{"a": 0.1, "b": "x", "c": 3}], ["c", "a", "b"])
        lines = path.read_text().splitlines()
        assert lines == ["c,a,b", "3,0.1,x"]
