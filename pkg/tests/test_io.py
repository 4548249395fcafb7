import numpy as np
import pytest

from hardyghost.io import (FormatError, format_keyvalue, format_p2, load_gray, load_object,
                           parse_keyvalue, parse_p2, quantize, read_complex_csv, read_csv_array,
                           resample_nearest, save_gray, save_object, write_complex_csv,
                           write_csv_array)
from hardyghost.spatial import GridSpec, ObjectField


class TestP2:
    def test_parse_with_comments(self):
        arr, maxval = parse_p2("P2\n# made by hand\n3 2\n# levels\n9\n0 1 2\n3 4 9 # end\n")
        assert maxval == 9
        np.testing.assert_array_equal(arr, [[0, 1, 2], [3, 4, 9]])

    def test_roundtrip(self):
        vals = np.random.default_rng(0).integers(0, 1000, (7, 5))
        arr, maxval = parse_p2(format_p2(vals, 1000, comment="x"))
        assert maxval == 1000
        np.testing.assert_array_equal(arr, vals)

    @pytest.mark.parametrize("text", ["P5\n1 1\n255\n0\n", "P2\n2 2\n255\n1 2 3\n", "P2\n1 1\n9\n10\n",
                                      "P2\n1 1\n0\n0\n", "P2\nx 1\n9\n0\n", ""])
    def test_malformed(self, text):
        with pytest.raises(FormatError):
            parse_p2(text)

    def test_non_2d_rejected(self):
        with pytest.raises(ValueError):
            format_p2(np.zeros(3))


class TestGray:
    def test_quantize(self):
        levels, scale = quantize(np.array([[0.0, 0.5, 1.0]]), 10)
        np.testing.assert_array_equal(levels, [[0, 5, 10]])
        assert scale == 0.1
        levels, scale = quantize(np.zeros((2, 2)))
        assert scale == 0 and not levels.any()
        with pytest.raises(ValueError):
            quantize(np.array([-1.0]))

    def test_save_load(self, tmp_path):
        img = np.random.default_rng(1).uniform(0, 123.0, (6, 4))
        save_gray(tmp_path / "a.pgm", img)
        back = load_gray(tmp_path / "a.pgm")
        assert np.max(np.abs(back - img)) <= 0.5 * 123.0 / 65535 + 1e-12


class TestCSV:
    def test_real_roundtrip_exact(self, tmp_path):
        vals = np.random.default_rng(2).normal(size=(3, 5))
        write_csv_array(tmp_path / "a.csv", vals)
        np.testing.assert_array_equal(read_csv_array(tmp_path / "a.csv"), vals)

    def test_complex_roundtrip(self, tmp_path):
        vals = np.array([[1 + 2j, -0.5j], [0.25, 3 - 1j]])
        write_complex_csv(tmp_path / "c.csv", vals)
        np.testing.assert_array_equal(read_complex_csv(tmp_path / "c.csv"), vals)

    def test_ragged(self, tmp_path):
        (tmp_path / "r.csv").write_text("c0,c1\n1,2\n3\n")
        with pytest.raises(FormatError):
            read_csv_array(tmp_path / "r.csv")
        (tmp_path / "e.csv").write_text("c0\n")
        with pytest.raises(FormatError):
            read_csv_array(tmp_path / "e.csv")


class TestObjects:
    def test_resample(self):
        src = np.arange(4).reshape(2, 2)
        np.testing.assert_array_equal(resample_nearest(src, 4),
                                      [[0, 0, 1, 1], [0, 0, 1, 1], [2, 2, 3, 3], [2, 2, 3, 3]])

    def test_p2_object(self, tmp_path):
        g = GridSpec(n=16)
        (tmp_path / "o.pgm").write_text(format_p2(np.array([[0, 255], [255, 0]]), 255))
        obj = load_object(tmp_path / "o.pgm", g)
        assert obj.values.shape == (16, 16)
        assert obj.values[0, 15] == 1 and obj.values[0, 0] == 0

    def test_complex_object_roundtrip(self, tmp_path):
        g = GridSpec(n=8)
        vals = 0.5 * np.exp(1j * np.linspace(0, 3, 64)).reshape(8, 8)
        save_object(tmp_path / "o.csv", ObjectField(g, vals))
        np.testing.assert_allclose(load_object(tmp_path / "o.csv", g).values, vals, atol=1e-15)

    def test_complex_object_too_bright(self, tmp_path):
        write_complex_csv(tmp_path / "o.csv", np.full((2, 2), 2.0 + 0j))
        with pytest.raises(FormatError):
            load_object(tmp_path / "o.csv", GridSpec(n=8))

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_object(tmp_path / "nope.pgm", GridSpec(n=8))


class TestKeyValue:
    def test_roundtrip(self):
        pairs = {"a.b": 1.5, "flag": True, "name": "x y", "n": 3}
        parsed = parse_keyvalue(format_keyvalue(pairs))
        assert parsed == {"a.b": "1.5", "flag": "true", "name": "x y", "n": "3"}

    def test_comments_and_blank(self):
        assert parse_keyvalue("# hi\n\n a = 1 # trailing\n") == {"a": "1"}

    @pytest.mark.parametrize("text", ["a = 1\na = 2\n", "novalue\n", " = 3\n"])
    def test_malformed(self, text):
        with pytest.raises(FormatError):
            parse_keyvalue(text)
