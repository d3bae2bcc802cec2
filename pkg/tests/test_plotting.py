from logodm.evaluation import ConfusionMatrix, ErrorCurve, ErrorPoint
from logodm.plotting import plot_confusion_matrix, plot_error_curve

import numpy as np

CURVE = ErrorCurve(tuple(ErrorPoint(k, e, 0.02, (e,)) for k, e in [(1, 0.4), (2, 0.2), (3, 0.25)]))
CM = ConfusionMatrix(("C", "I", "S"), np.array([[5, 1, 0], [0, 4, 2], [1, 0, 6]]))


def test_svg_written_and_deterministic(tmp_path):
    for name in ("a", "b"):
        plot_error_curve(CURVE, tmp_path / f"{name}_curve.svg", "error curve")
        plot_confusion_matrix(CM, tmp_path / f"{name}_cm.svg")
    for kind in ("curve", "cm"):
        a = (tmp_path / f"a_{kind}.svg").read_bytes()
        assert a.startswith(b"<?xml") and b"<svg" in a
        assert a == (tmp_path / f"b_{kind}.svg").read_bytes()
