import numpy as np
import pytest

from figrender import RenderError, rank_bias_figure, render
from figrender.cli import main

SUITE_HEADER = ("network_id,M,h2_over_k2,sd_bar,abs_dP_bar,abs_dP_bar_norm,"
                "abs_dSUCRA_bar,abs_dSUCRA_bar_norm,abs_dd_bar,mean_tau,"
                "sd_tau")

SUITE_ROWS = [
    "loop,12,0.0,2.1,0.4,0.05,0.02,0.005,0.3,0.24,0.05",
    "chain,21,0.82,4.5,1.7,0.21,0.01,0.002,0.5,0.31,0.06",
    "star,21,0.57,3.9,1.2,0.15,0.03,0.007,0.4,0.29,0.05",
    "ladder,21,0.50,3.6,1.1,0.14,0.02,0.006,0.4,0.28,0.05",
    "tadpole,6,0.17,2.8,0.7,0.09,0.02,0.004,0.6,0.33,0.08",
    "dense,31,0.88,4.9,1.8,0.22,0.04,0.010,0.5,0.30,0.05",
]


def write_suite(path, rows=None):
    lines = [SUITE_HEADER] + (SUITE_ROWS if rows is None else rows)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_replications(path):
    """Three treatments, four replications, hand-pickable delta_P means."""
    cols = ["rep", "d_hat_T1T2", "d_hat_T1T3", "tau_hat"]
    cols += [f"P_hat_T{a}_r{r}" for a in (1, 2, 3) for r in (1, 2, 3)]
    cols += [f"delta_P_T{a}_r{r}" for a in (1, 2, 3) for r in (1, 2, 3)]
    cols += [f"sucra_T{a}" for a in (1, 2, 3)]
    rng = np.random.default_rng(42)
    lines = [",".join(cols)]
    for rep in range(1, 5):
        cells = [str(rep)]
        cells += ["%.6f" % v for v in rng.normal(size=3)]
        cells += ["%.6f" % v for v in rng.uniform(size=9)]
        # delta_P cells: rep-independent part + known offset per column
        cells += ["%.6f" % (0.01 * k + 0.001 * rep) for k in range(9)]
        cells += ["%.6f" % v for v in rng.uniform(size=3)]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_geometry(path, skip=None):
    rows = [
        ("K_T1T2", "2"), ("K_T1T3", "1"), ("K_T2T3", "3"),
        ("degree_T1", "3"), ("degree_T2", "5"), ("degree_T3", "4"),
        ("h2", "0.0555"), ("h2_over_k2", "0.25"), ("m_trials", "6"),
        ("mean_degree", "4"), ("n_treatments", "3"),
    ]
    lines = ["quantity,value"]
    lines += [f"{q},{v}" for q, v in rows if q != skip]
    path.write_text("\n".join(lines) + "\n")
    return path


def test_irregularity_scatter_one_marker_per_row(tmp_path):
    suite = write_suite(tmp_path / "suite.csv")
    out = tmp_path / "fig.png"
    n_points = render("irregularity_scatter", [suite], out)
    assert n_points == len(SUITE_ROWS)
    assert out.is_file() and out.stat().st_size > 0


def test_irregularity_scatter_metric_option(tmp_path):
    suite = write_suite(tmp_path / "suite.csv")
    out = tmp_path / "fig.png"
    assert render("irregularity_scatter", [suite], out,
                  metric="sd_bar") == 6


def test_missing_metric_column_is_named(tmp_path):
    suite = write_suite(tmp_path / "suite.csv")
    with pytest.raises(RenderError, match="no_such_metric"):
        render("irregularity_scatter", [suite], tmp_path / "fig.png",
               metric="no_such_metric")
    assert not (tmp_path / "fig.png").exists()


def test_tau_vs_m_counts_rows(tmp_path):
    suite = write_suite(tmp_path / "suite.csv")
    out = tmp_path / "tau.png"
    assert render("tau_vs_M", [suite], out, tau_true=0.1) == 6
    assert out.is_file() and out.stat().st_size > 0


def test_rank_bias_point_count_and_means(tmp_path):
    reps = write_replications(tmp_path / "replications.csv")
    geo = write_geometry(tmp_path / "geometry.csv")
    fig, n_points = rank_bias_figure(reps, geo)
    assert n_points == 3 * 3
    # one scatter collection per rank; y values are column means
    ax = fig.axes[0]
    collections = [c for c in ax.collections if len(c.get_offsets())]
    assert len(collections) == 3
    rank1 = collections[0].get_offsets()
    expected = [0.01 * k + 0.001 * np.mean([1, 2, 3, 4])
                for k in (0, 3, 6)]  # delta_P_T*_r1 columns
    assert np.allclose(sorted(rank1[:, 1]), sorted(expected), atol=1e-9)
    # x positions sit near the treatment degrees (small rank dodge only)
    assert np.allclose(sorted(rank1[:, 0]), [3, 4, 5], atol=0.2)


def test_rank_bias_missing_degree_is_named(tmp_path):
    reps = write_replications(tmp_path / "replications.csv")
    geo = write_geometry(tmp_path / "geometry.csv", skip="degree_T3")
    with pytest.raises(RenderError, match="degree_T3"):
        rank_bias_figure(reps, geo)


def test_rank_bias_requires_delta_p_columns(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("rep,tau_hat\n1,0.2\n")
    geo = write_geometry(tmp_path / "geometry.csv")
    with pytest.raises(RenderError, match="delta_P"):
        rank_bias_figure(bad, geo)


def test_empty_table_rejected_and_no_file_written(tmp_path):
    empty = tmp_path / "suite.csv"
    empty.write_text(SUITE_HEADER + "\n")
    out = tmp_path / "fig.png"
    with pytest.raises(RenderError, match="no data rows"):
        render("irregularity_scatter", [empty], out)
    assert not out.exists()


def test_missing_file_rejected(tmp_path):
    with pytest.raises(RenderError, match="not found"):
        render("tau_vs_M", [tmp_path / "nope.csv"], tmp_path / "fig.png")


def test_wrong_input_arity(tmp_path):
    suite = write_suite(tmp_path / "suite.csv")
    with pytest.raises(RenderError, match="two input CSVs"):
        render("rank_bias_vs_degree", [suite], tmp_path / "fig.png")


def test_png_output_is_byte_stable(tmp_path):
    suite = write_suite(tmp_path / "suite.csv")
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    render("irregularity_scatter", [suite], a)
    render("irregularity_scatter", [suite], b)
    assert a.read_bytes() == b.read_bytes()


def test_svg_output_is_byte_stable(tmp_path):
    suite = write_suite(tmp_path / "suite.csv")
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    render("tau_vs_M", [suite], a)
    render("tau_vs_M", [suite], b)
    assert a.read_bytes() == b.read_bytes()


def test_cli_success(tmp_path, capsys):
    suite = write_suite(tmp_path / "suite.csv")
    out = tmp_path / "fig.png"
    code = main(["irregularity_scatter", "--in", str(suite),
                 "--out", str(out)])
    assert code == 0
    assert "6 points" in capsys.readouterr().out
    assert out.is_file()


def test_cli_two_inputs(tmp_path, capsys):
    reps = write_replications(tmp_path / "replications.csv")
    geo = write_geometry(tmp_path / "geometry.csv")
    out = tmp_path / "bias.png"
    code = main(["rank_bias_vs_degree", "--in", f"{reps},{geo}",
                 "--out", str(out)])
    assert code == 0
    assert "9 points" in capsys.readouterr().out


def test_cli_input_error_exits_2(tmp_path, capsys):
    code = main(["tau_vs_M", "--in", str(tmp_path / "nope.csv"),
                 "--out", str(tmp_path / "fig.png")])
    assert code == 2
    assert "not found" in capsys.readouterr().err


def test_cli_rejects_unknown_kind(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(["pie_chart", "--in", "x.csv", "--out", "y.png"])
    assert excinfo.value.code == 2
