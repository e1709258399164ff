import json

import pytest

from lgmd import io
from lgmd.cli import main
from lgmd.core import Frame


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def summary(out):
    return dict(line.split(": ", 1) for line in out.splitlines() if ": " in line)


@pytest.fixture(scope="module")
def looming_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("loom")
    assert main(["stim", "--kind", "looming", "--out", str(out)]) == 0
    return out


def test_detect_static_scene(tmp_path, capsys):
    io.write_frames([Frame.uniform(128)] * 10, tmp_path)
    code, out, _ = run(capsys, "detect", "--input", str(tmp_path))
    s = summary(out)
    assert code == 0 and s["spikes"] == "0" and s["first_c_lgmd"] == "none"


def test_detect_looming_exits_two(looming_dir, tmp_path, capsys):
    code, out, _ = run(capsys, "detect", "--input", str(looming_dir), "--trace", str(tmp_path / "t.csv"))
    s = summary(out)
    assert code == 2 and int(s["first_c_lgmd"]) < int(s["frames"]) - 1
    assert len(io.read_trace(tmp_path / "t.csv")) == 60


def test_detect_bad_config(looming_dir, tmp_path, capsys):
    code, _, err = run(capsys, "detect", "--input", str(looming_dir), "--config", str(tmp_path / "none.cfg"))
    assert code == 1 and "none.cfg" in err


def test_detect_honours_config(looming_dir, tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n_sp = 50\n")
    code, out, _ = run(capsys, "detect", "--input", str(looming_dir), "--config", str(cfg))
    assert code == 0 and summary(out)["first_c_lgmd"] == "none"


def test_stim_writes_frames_and_manifest(looming_dir):
    files = sorted(p.name for p in looming_dir.iterdir())
    assert len(files) == 61 and files[0] == "frame_0000.pgm" and "manifest.json" in files
    manifest = json.loads((looming_dir / "manifest.json").read_text())
    assert manifest["kind"] == "looming" and manifest["frames"] == 60


def test_stim_is_byte_identical(tmp_path, capsys):
    for d in ("a", "b"):
        run(capsys, "stim", "--kind", "rotate", "--frames", "5", "--seed", "3", "--out", str(tmp_path / d))
    for p in (tmp_path / "a").iterdir():
        assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()


def test_stim_rejects_oversized_end(tmp_path, capsys):
    code, _, err = run(capsys, "stim", "--kind", "looming", "--end-size", "1.2", "--out", str(tmp_path))
    assert code == 1 and "end_size" in err


def test_sim_default_reaches(tmp_path, capsys):
    code, out, _ = run(capsys, "sim", "--trace", str(tmp_path / "s.csv"))
    assert code == 0 and int(summary(out)["avoid_maneuvers"]) >= 1
    rows = io.read_trace(tmp_path / "s.csv")
    assert rows[0].task == "cruise" and rows[0].x is not None


def test_sim_without_detection_collides(capsys):
    code, out, _ = run(capsys, "sim", "--no-detect")
    assert code == 3 and summary(out)["outcome"] == "collided"


def test_sim_destination_in_obstacle(tmp_path, capsys):
    arena = tmp_path / "arena.cfg"
    arena.write_text("dest_x = 3.0\ndest_y = 3.0\n")
    code, _, err = run(capsys, "sim", "--arena", str(arena))
    assert code == 1 and "destination" in err


def test_sim_batch_keys_outputs_by_seed(tmp_path, capsys):
    arena = tmp_path / "arena.cfg"
    arena.write_text("obstacle = false\nmax_time = 1\n")
    code, out, _ = run(capsys, "sim", "--arena", str(arena), "--episodes", "2", "--seed", "4",
                       "--trace", str(tmp_path / "ep.csv"), "--frames-out", str(tmp_path / "fr"))
    assert code == 4 and out.count("outcome: timeout") == 2
    assert (tmp_path / "ep_seed4.csv").exists() and (tmp_path / "ep_seed5.csv").exists()
    assert len(list((tmp_path / "fr_seed5").glob("*.pgm"))) == 30


def test_bench_reports_rates(capsys):
    code, out, _ = run(capsys, "bench", "--frames", "50")
    s = summary(out)
    assert code == 0 and float(s["frames_per_second"]) > 0 and float(s["us_per_frame"]) > 0


def test_bench_outputs_are_repeatable(capsys):
    _, a, _ = run(capsys, "bench", "--frames", "120")
    _, b, _ = run(capsys, "bench", "--frames", "120")
    assert summary(a)["spikes"] == summary(b)["spikes"]


@pytest.mark.parametrize("argv", [["bench", "--frames", "0"], [], ["detect"], ["fly"]])
def test_usage_errors_exit_one(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1
