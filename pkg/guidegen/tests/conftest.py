import pytest
from hypothesis import HealthCheck, settings

from rasterutil import make_entry, png_bytes

try:
    import guidegen.formats  # noqa: F401
except ImportError:
    # collect nothing when the package is not installed
    collect_ignore_glob = ["test_*.py"]

settings.register_profile(
    "suite", deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("suite")


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """Three-entry 32x32 corpus written straight in the file formats."""
    root = tmp_path_factory.mktemp("tiny-corpus")
    for sub in ("maps", "tasks", "guidance"):
        (root / sub).mkdir()
    entries = [
        ("e0", make_entry(bar_cols=(14, 15), door_rows=range(12, 20),
                          start=(6, 16), goal=(26, 16), band_rows=range(14, 19))),
        ("e1", make_entry(bar_cols=(20, 21), door_rows=range(10, 18),
                          start=(4, 14), goal=(28, 14), band_rows=range(12, 17))),
    ]
    lines = []
    for name, (base, task, guide) in entries:
        (root / "maps" / f"{name}.png").write_bytes(png_bytes(base))
        (root / "tasks" / f"{name}.png").write_bytes(png_bytes(task))
        (root / "guidance" / f"{name}.png").write_bytes(png_bytes(guide))
        lines.append(f"{name},corridor,1,train,maps/{name}.png,"
                     f"tasks/{name}.png,guidance/{name}.png")
    # a test-split row may reuse the first entry's files
    lines.append("e2,corridor,2,test,maps/e0.png,tasks/e0.png,guidance/e0.png")
    manifest = root / "manifest"
    manifest.write_text("".join(line + "\n" for line in lines))
    return manifest
