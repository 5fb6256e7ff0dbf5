"""Pattern files, quantized rasters, the tensor container, datasets."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgbwlab.cfa import CfaPattern
from rgbwlab.formats import (
    BadMagicError,
    BadVersionError,
    EmptyPatternError,
    IllegalCharacterError,
    ImageFormatError,
    PatternFormatError,
    RaggedGridError,
    TENSOR_MAGIC,
    TensorFormatError,
    TruncatedPayloadError,
    decode_tensor,
    load_dataset,
    load_image,
    load_pattern,
    load_plane,
    parse_pattern,
    read_tensor,
    save_image,
    serialize_pattern,
    write_tensor,
)
from rgbwlab.image import RgbImage


class TestPatternText:
    def test_parse_basic_grid(self):
        pattern = parse_pattern("name: demo\nRWGW\nWWWW\n")
        assert pattern.name == "demo"
        assert pattern.rows == ("RWGW", "WWWW")

    def test_comments_and_blank_lines_skipped(self):
        pattern = parse_pattern("# layout\n\n  GR  \n# mid\nBG\n")
        assert pattern.rows == ("GR", "BG")
        assert pattern.name == ""

    def test_illegal_character_reports_position(self):
        with pytest.raises(IllegalCharacterError) as exc_info:
            parse_pattern("GRX")
        err = exc_info.value
        assert (err.line, err.col, err.char) == (0, 2, "X")

    def test_illegal_character_counts_raw_lines(self):
        # line index covers comment lines too
        with pytest.raises(IllegalCharacterError) as exc_info:
            parse_pattern("# one\nGW\ngW\n")
        assert (exc_info.value.line, exc_info.value.col) == (2, 0)

    def test_ragged_grid_rejected(self):
        with pytest.raises(RaggedGridError):
            parse_pattern("GRW\nBG\n")

    def test_empty_rejected(self):
        for text in ("", "# only comments\n", "name: x\n"):
            with pytest.raises(EmptyPatternError):
                parse_pattern(text)

    def test_duplicate_name_rejected(self):
        with pytest.raises(PatternFormatError):
            parse_pattern("name: a\nname: b\nGR\nBG\n")

    def test_serialize_parse_round_trip(self):
        pattern = CfaPattern("roundtrip", ("WGWR", "GWRW", "WBWG", "BWGW"))
        assert parse_pattern(serialize_pattern(pattern)) == pattern

    def test_serialize_unnamed_omits_name_line(self):
        text = serialize_pattern(CfaPattern("", ("RG",)))
        assert text == "RG\n"

    def test_load_pattern_defaults_name_to_stem(self, tmp_path):
        path = tmp_path / "corner.txt"
        path.write_text("RW\nWW\n", "utf-8")
        assert load_pattern(path).name == "corner"

    def test_load_pattern_keeps_explicit_name(self, tmp_path):
        path = tmp_path / "file.txt"
        path.write_text("name: tile\nRW\nWW\n", "utf-8")
        assert load_pattern(path).name == "tile"


class TestRasters:
    def test_png_8bit_rgb_round_trip(self, tmp_path):
        rng = np.random.default_rng(60)
        original = rng.uniform(size=(9, 7, 3))
        path = tmp_path / "img.png"
        save_image(RgbImage(original), path)
        loaded = load_image(path)
        assert np.abs(loaded.data - original).max() <= 0.5 / 255 + 1e-12

    def test_quantization_rounds_half_up(self, tmp_path):
        path = tmp_path / "half.png"
        save_image(np.full((2, 2, 3), 0.5), path)
        assert load_image(path).data[0, 0, 0] == pytest.approx(128 / 255, abs=1e-15)

    def test_out_of_range_values_clamped(self, tmp_path):
        path = tmp_path / "clamp.png"
        save_image(np.array([[[-0.5, 0.0, 2.0]]]), path)
        np.testing.assert_array_equal(load_image(path).data[0, 0], [0.0, 0.0, 1.0])

    def test_png_16bit_gray_round_trip(self, tmp_path):
        path = tmp_path / "gray16.png"
        plane = np.array([[0.0, 32768 / 65535], [1.0, 0.25]])
        save_image(plane, path, bit_depth=16)
        loaded = load_plane(path)
        assert loaded[0, 0] == 0.0
        assert loaded[0, 1] == 32768 / 65535
        assert loaded[1, 0] == 1.0
        assert abs(loaded[1, 1] - 0.25) <= 0.5 / 65535

    def test_png_16bit_rgb_refused(self, tmp_path):
        with pytest.raises(ImageFormatError):
            save_image(np.zeros((2, 2, 3)), tmp_path / "x.png", bit_depth=16)

    @pytest.mark.parametrize("bit_depth", [8, 16])
    def test_ppm_rgb_round_trip(self, tmp_path, bit_depth):
        rng = np.random.default_rng(61)
        maxval = (1 << bit_depth) - 1
        original = rng.integers(0, maxval + 1, size=(5, 6, 3)) / maxval
        path = tmp_path / "img.ppm"
        save_image(original, path, bit_depth=bit_depth)
        np.testing.assert_array_equal(load_image(path).data, original)

    @pytest.mark.parametrize("bit_depth", [8, 16])
    def test_pgm_gray_round_trip(self, tmp_path, bit_depth):
        maxval = (1 << bit_depth) - 1
        original = (np.arange(12).reshape(3, 4) * 37 % (maxval + 1)) / maxval
        path = tmp_path / "img.pgm"
        save_image(original, path, bit_depth=bit_depth)
        np.testing.assert_array_equal(load_plane(path), original)

    def test_gray_file_loads_as_replicated_rgb(self, tmp_path):
        path = tmp_path / "g.pgm"
        save_image(np.full((3, 3), 0.5), path)
        loaded = load_image(path)
        assert loaded.data.shape == (3, 3, 3)
        assert (loaded.data[:, :, 0] == loaded.data[:, :, 1]).all()

    def test_load_plane_averages_color(self, tmp_path):
        path = tmp_path / "c.ppm"
        arr = np.zeros((2, 2, 3))
        arr[:, :, 0] = 90 / 255
        arr[:, :, 1] = 30 / 255
        save_image(arr, path)
        np.testing.assert_allclose(load_plane(path), 40 / 255, atol=1e-15)

    def test_suffix_mismatch_rejected(self, tmp_path):
        with pytest.raises(ImageFormatError):
            save_image(np.zeros((2, 2, 3)), tmp_path / "x.pgm")
        with pytest.raises(ImageFormatError):
            save_image(np.zeros((2, 2)), tmp_path / "x.ppm")

    def test_unsupported_suffix_rejected(self, tmp_path):
        with pytest.raises(ImageFormatError):
            save_image(np.zeros((2, 2)), tmp_path / "x.jpg")
        (tmp_path / "x.bmp").write_bytes(b"BM")
        with pytest.raises(ImageFormatError):
            load_image(tmp_path / "x.bmp")

    def test_corrupt_png_rejected(self, tmp_path):
        path = tmp_path / "bad.png"
        path.write_bytes(b"not a png at all")
        with pytest.raises(ImageFormatError):
            load_image(path)

    def test_depth_mismatch_rejected(self, tmp_path):
        path = tmp_path / "8bit.png"
        save_image(np.zeros((2, 2)), path, bit_depth=8)
        with pytest.raises(ImageFormatError):
            load_image(path, bit_depth=16)

    def test_truncated_ppm_rejected(self, tmp_path):
        path = tmp_path / "t.ppm"
        save_image(np.zeros((4, 4, 3)), path)
        data = path.read_bytes()
        path.write_bytes(data[:-5])
        with pytest.raises(ImageFormatError):
            load_image(path)

    def test_bad_shape_rejected(self, tmp_path):
        with pytest.raises(ImageFormatError):
            save_image(np.zeros((2, 2, 2)), tmp_path / "x.png")


class TestTensorContainer:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(62)
        arr = rng.standard_normal((5, 4, 3)) * 10.0 ** rng.integers(-200, 200, (5, 4, 3))
        path = tmp_path / "t.bin"
        write_tensor(path, arr)
        back = read_tensor(path)
        assert back.tobytes() == arr.tobytes()

    def test_two_dimensional_input_gains_unit_channel(self, tmp_path):
        path = tmp_path / "t.bin"
        write_tensor(path, np.ones((3, 2)))
        assert read_tensor(path).shape == (3, 2, 1)

    def test_negative_zero_survives(self, tmp_path):
        path = tmp_path / "t.bin"
        write_tensor(path, np.array([[-0.0, 0.0]]))
        back = read_tensor(path)[:, :, 0]
        assert np.signbit(back[0, 0]) and not np.signbit(back[0, 1])

    def test_header_layout(self, tmp_path):
        path = tmp_path / "t.bin"
        write_tensor(path, np.zeros((2, 3, 4)))
        data = path.read_bytes()
        assert data[:8] == TENSOR_MAGIC
        assert data[8:24] == (1).to_bytes(4, "little") + b"".join(
            n.to_bytes(4, "little") for n in (2, 3, 4)
        )
        assert len(data) == 24 + 2 * 3 * 4 * 8

    def test_non_finite_refused(self, tmp_path):
        with pytest.raises(TensorFormatError):
            write_tensor(tmp_path / "t.bin", np.array([[np.nan]]))
        with pytest.raises(TensorFormatError):
            write_tensor(tmp_path / "t.bin", np.array([[np.inf]]))

    def test_bad_rank_refused(self, tmp_path):
        with pytest.raises(TensorFormatError):
            write_tensor(tmp_path / "t.bin", np.zeros(4))
        with pytest.raises(TensorFormatError):
            write_tensor(tmp_path / "t.bin", np.zeros((2, 2, 2, 2)))

    def test_bad_magic(self):
        with pytest.raises(BadMagicError):
            decode_tensor(b"WRONGMAG" + bytes(24))
        with pytest.raises(BadMagicError):
            decode_tensor(b"")

    def test_bad_version(self, tmp_path):
        path = tmp_path / "t.bin"
        write_tensor(path, np.zeros((1, 1)))
        data = bytearray(path.read_bytes())
        data[8] = 9
        with pytest.raises(BadVersionError):
            decode_tensor(bytes(data))

    def test_truncated_header_and_payload(self, tmp_path):
        path = tmp_path / "t.bin"
        write_tensor(path, np.zeros((2, 2)))
        data = path.read_bytes()
        with pytest.raises(TruncatedPayloadError):
            decode_tensor(data[:12])
        with pytest.raises(TruncatedPayloadError):
            decode_tensor(data[:-1])

    def test_trailing_bytes_refused(self, tmp_path):
        path = tmp_path / "t.bin"
        write_tensor(path, np.zeros((2, 2)))
        with pytest.raises(TensorFormatError):
            decode_tensor(path.read_bytes() + b"\x00")

    def test_zero_dimension_refused(self):
        header = TENSOR_MAGIC + b"".join(
            n.to_bytes(4, "little") for n in (1, 0, 2, 3)
        )
        with pytest.raises(TensorFormatError):
            decode_tensor(header)

    @settings(max_examples=300, deadline=None)
    @given(st.binary(max_size=64))
    def test_fuzzed_blobs_raise_structured_errors(self, blob):
        try:
            decode_tensor(blob)
        except TensorFormatError:
            pass

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.data())
    def test_fuzzed_headers_raise_structured_errors(self, seed, data):
        rng = np.random.default_rng(seed)
        blob = TENSOR_MAGIC + rng.bytes(data.draw(st.integers(0, 48)))
        try:
            decode_tensor(blob)
        except TensorFormatError:
            pass


class TestDatasetLoading:
    def test_scenes_sorted_with_pan_siblings(self, tmp_path):
        rng = np.random.default_rng(63)
        rgb_a = rng.integers(0, 256, (4, 4, 3)) / 255
        pan_a = rng.integers(0, 256, (4, 4)) / 255
        rgb_b = rng.integers(0, 256, (4, 4, 3)) / 255
        save_image(rgb_b, tmp_path / "b.png")
        save_image(rgb_a, tmp_path / "a.png")
        save_image(pan_a, tmp_path / "a_pan.png")
        (tmp_path / "notes.txt").write_text("ignored", "utf-8")

        scenes = load_dataset(tmp_path)
        assert [name for name, _ in scenes] == ["a", "b"]
        scene_a = dict(scenes)["a"]
        scene_b = dict(scenes)["b"]
        # measured pan plane is used verbatim
        np.testing.assert_array_equal(scene_a.data[:, :, 3], pan_a)
        # no sibling: white synthesized as the channel mean
        np.testing.assert_allclose(
            scene_b.data[:, :, 3], rgb_b.mean(axis=2), atol=1e-15
        )

    def test_missing_directory_rejected(self, tmp_path):
        with pytest.raises(ImageFormatError):
            load_dataset(tmp_path / "nope")

    def test_empty_directory_gives_empty_list(self, tmp_path):
        assert load_dataset(tmp_path) == []
