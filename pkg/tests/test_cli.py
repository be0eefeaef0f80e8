"""Tests for the command-line front end and its file formats."""

import numpy as np
import pytest

from kryode.cli import (
    MatrixMarketParseError,
    UnsupportedMatrixFormatError,
    load_vector,
    main,
    parse_matrix_market,
    parse_source_spec,
)


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# Matrix Market parsing


def test_parse_identity(tmp_path):
    path = write(
        tmp_path / "eye.mtx",
        "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 2 1.0\n",
    )
    op = parse_matrix_market(path)
    assert op.dimension == 2
    np.testing.assert_array_equal(op.apply(np.array([1.0, 0.0])), [1.0, 0.0])


def test_parse_symmetric_expansion(tmp_path):
    path = write(
        tmp_path / "sym.mtx",
        "%%MatrixMarket matrix coordinate real symmetric\n"
        "2 2 3\n1 1 2.0\n2 2 2.0\n2 1 -1.0\n",
    )
    op = parse_matrix_market(path)
    assert op.symmetric
    np.testing.assert_array_equal(op.apply(np.array([1.0, 0.0])), [2.0, -1.0])
    np.testing.assert_array_equal(op.apply(np.array([0.0, 1.0])), [-1.0, 2.0])


def test_parse_duplicates_sum(tmp_path):
    path = write(
        tmp_path / "dup.mtx",
        "%%MatrixMarket matrix coordinate real general\n"
        "1 1 2\n1 1 0.5\n1 1 0.5\n",
    )
    op = parse_matrix_market(path)
    np.testing.assert_array_equal(op.apply(np.array([1.0])), [1.0])


def test_parse_comments_and_blank_lines(tmp_path):
    path = write(
        tmp_path / "c.mtx",
        "%%MatrixMarket matrix coordinate real general\n"
        "% a comment\n\n2 2 1\n% another\n1 2 3.0\n",
    )
    op = parse_matrix_market(path)
    np.testing.assert_array_equal(op.apply(np.array([0.0, 1.0])), [3.0, 0.0])


def test_parse_rejects_bad_header(tmp_path):
    path = write(tmp_path / "bad.mtx", "MatrixMarket matrix fun\n")
    with pytest.raises(MatrixMarketParseError, match=":1"):
        parse_matrix_market(path)


@pytest.mark.parametrize("fieldname", ["complex", "pattern", "integer"])
def test_parse_rejects_unsupported_fields(tmp_path, fieldname):
    path = write(
        tmp_path / "u.mtx",
        f"%%MatrixMarket matrix coordinate {fieldname} general\n1 1 1\n1 1 1\n",
    )
    with pytest.raises(UnsupportedMatrixFormatError):
        parse_matrix_market(path)


def test_parse_rejects_array_format_and_skew(tmp_path):
    path = write(
        tmp_path / "a.mtx", "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n"
    )
    with pytest.raises(UnsupportedMatrixFormatError):
        parse_matrix_market(path)
    path = write(
        tmp_path / "s.mtx",
        "%%MatrixMarket matrix coordinate real skew-symmetric\n1 1 0\n",
    )
    with pytest.raises(UnsupportedMatrixFormatError):
        parse_matrix_market(path)


def test_parse_error_carries_line_number(tmp_path):
    path = write(
        tmp_path / "m.mtx",
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n",
    )
    with pytest.raises(MatrixMarketParseError, match=":3"):
        parse_matrix_market(path)


def test_parse_rejects_out_of_range_index(tmp_path):
    path = write(
        tmp_path / "r.mtx",
        "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
    )
    with pytest.raises(MatrixMarketParseError, match="outside"):
        parse_matrix_market(path)


def test_parse_rejects_missing_entries(tmp_path):
    path = write(
        tmp_path / "short.mtx",
        "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n",
    )
    with pytest.raises(MatrixMarketParseError, match="expected 3 entries"):
        parse_matrix_market(path)


def test_parse_rejects_non_square(tmp_path):
    path = write(
        tmp_path / "rect.mtx",
        "%%MatrixMarket matrix coordinate real general\n2 3 1\n1 1 1.0\n",
    )
    with pytest.raises(MatrixMarketParseError, match="square"):
        parse_matrix_market(path)


# ---------------------------------------------------------------------------
# vectors and source specs


def test_load_vector(tmp_path):
    path = write(tmp_path / "v.txt", "1.0\n-2.5\n# comment\n3e-1\n")
    np.testing.assert_array_equal(load_vector(path), [1.0, -2.5, 0.3])


def test_load_vector_errors(tmp_path):
    path = write(tmp_path / "bad.txt", "1.0\nabc\n")
    with pytest.raises(ValueError, match=":2"):
        load_vector(path)
    empty = write(tmp_path / "empty.txt", "\n")
    with pytest.raises(ValueError, match="empty"):
        load_vector(empty)


def test_source_spec_constant_and_sin(tmp_path):
    vec = write(tmp_path / "c.txt", "1.0\n2.0\n")
    g = parse_source_spec(f"builtin:constant:{vec}")
    np.testing.assert_array_equal(g(0.3), [1.0, 2.0])
    g = parse_source_spec(f"builtin:sin:{vec}:2.0")
    np.testing.assert_allclose(g(0.25), np.sin(0.5) * np.array([1.0, 2.0]))


def test_source_spec_poly(tmp_path):
    table = write(tmp_path / "p.csv", "1.0,0.0\n0.0,1.0\n")
    g = parse_source_spec(f"builtin:poly:{table}")
    np.testing.assert_allclose(g(2.0), [1.0, 2.0])


def test_source_spec_table(tmp_path):
    table = write(
        tmp_path / "t.csv",
        "t,g1,g2\n0.0,1.0,0.0\n0.5,2.0,1.0\n1.0,3.0,4.0\n",
    )
    g = parse_source_spec(f"table:{table}")
    np.testing.assert_array_equal(g(0.5), [2.0, 1.0])


def test_source_spec_errors(tmp_path):
    with pytest.raises(ValueError):
        parse_source_spec("magic:stuff")
    with pytest.raises(ValueError):
        parse_source_spec("builtin:constant:")
    vec = write(tmp_path / "v.txt", "1.0\n")
    with pytest.raises(ValueError):
        parse_source_spec(f"builtin:sin:{vec}:abc")
    with pytest.raises(ValueError):
        parse_source_spec("builtin:wavelet:foo")


# ---------------------------------------------------------------------------
# end-to-end runs


def scalar_fixture(tmp_path):
    mtx = write(
        tmp_path / "a.mtx",
        "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1.0\n",
    )
    vec = write(tmp_path / "g.txt", "1.0\n")
    return mtx, vec


def test_scalar_run_end_to_end(tmp_path, capsys):
    mtx, vec = scalar_fixture(tmp_path)
    out = tmp_path / "solution.csv"
    res = tmp_path / "residuals.csv"
    code = main(
        [
            "--matrix", mtx,
            "--source", f"builtin:constant:{vec}",
            "--tmax", "1.0",
            "--out", str(out),
            "--residuals", str(res),
        ]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 101
    t_last, y_last = (float(x) for x in lines[-1].split(","))
    assert t_last == 1.0
    assert y_last == pytest.approx(1.0 - np.exp(-1.0), abs=1e-10)
    rows = res.read_text().strip().splitlines()
    assert rows[0].startswith("0,")
    summary = capsys.readouterr().out
    assert "converged=True" in summary
    assert "n=1" in summary


def test_equilibrium_run_reports_zero_residual(tmp_path):
    mtx = write(
        tmp_path / "a.mtx",
        "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 2 2.0\n",
    )
    v0 = write(tmp_path / "v.txt", "1.0\n1.0\n")
    gvec = write(tmp_path / "g.txt", "1.0\n2.0\n")  # = A v
    res = tmp_path / "residuals.csv"
    code = main(
        [
            "--matrix", mtx,
            "--source", f"builtin:constant:{gvec}",
            "--v0", v0,
            "--tmax", "1.0",
            "--out", str(tmp_path / "s.csv"),
            "--residuals", str(res),
        ]
    )
    assert code == 0
    first = res.read_text().strip().splitlines()[0].split(",")
    assert first[0] == "0"
    assert float(first[1]) == 0.0


def test_forced_non_convergence_exits_2(tmp_path):
    rng = np.random.default_rng(0)
    n = 16
    lines = [f"%%MatrixMarket matrix coordinate real general\n{n} {n} {n * n}"]
    scale = 200.0
    A = scale * (np.eye(n) + 0.3 * rng.standard_normal((n, n)) / np.sqrt(n))
    for i in range(n):
        for j in range(n):
            lines.append(f"{i + 1} {j + 1} {A[i, j]:.17g}")
    mtx = write(tmp_path / "hard.mtx", "\n".join(lines) + "\n")
    gvec = write(tmp_path / "g.txt", "\n".join(["1.0"] * n) + "\n")
    res = tmp_path / "residuals.csv"
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        code = main(
            [
                "--matrix", mtx,
                "--source", f"builtin:sin:{gvec}:1.0",
                "--tmax", "1.0",
                "--tol", "1e-30",
                "--max-restarts", "1",
                "--block-steps", "2",
                "--out", str(tmp_path / "s.csv"),
                "--residuals", str(res),
            ]
        )
    assert code == 2
    assert res.read_text().strip()  # history was written


def test_input_errors_exit_1(tmp_path, capsys):
    code = main(
        [
            "--matrix", str(tmp_path / "missing.mtx"),
            "--source", "builtin:constant:nowhere.txt",
            "--tmax", "1.0",
        ]
    )
    assert code == 1
    assert "missing.mtx" in capsys.readouterr().err

    mtx, vec = scalar_fixture(tmp_path)
    code = main(["--matrix", mtx, "--source", f"builtin:constant:{vec}", "--tmax", "-1.0"])
    assert code == 1

    two = write(tmp_path / "g2.txt", "1.0\n2.0\n")
    code = main(["--matrix", mtx, "--source", f"builtin:constant:{two}", "--tmax", "1.0"])
    assert code == 1


def test_reruns_are_byte_identical(tmp_path):
    mtx, vec = scalar_fixture(tmp_path)
    outputs = []
    for tag in ("one", "two"):
        out = tmp_path / f"s_{tag}.csv"
        res = tmp_path / f"r_{tag}.csv"
        code = main(
            [
                "--matrix", mtx,
                "--source", f"builtin:constant:{vec}",
                "--tmax", "1.0",
                "--out", str(out),
                "--residuals", str(res),
            ]
        )
        assert code == 0
        outputs.append((out.read_bytes(), res.read_bytes()))
    assert outputs[0] == outputs[1]


def test_evaluator_mode_flag(tmp_path):
    mtx, vec = scalar_fixture(tmp_path)
    code = main(
        [
            "--matrix", mtx,
            "--source", f"builtin:constant:{vec}",
            "--tmax", "1.0",
            "--mode", "evaluator",
            "--out", str(tmp_path / "s.csv"),
            "--residuals", str(tmp_path / "r.csv"),
        ]
    )
    assert code == 0
