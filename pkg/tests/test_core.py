"""Domain types and the fixed interval schemes."""

import numpy as np
import pytest

from scorelab.core import (
    DomainError,
    EvalReport,
    MosSample,
    SchemeKind,
    ValidationError,
    make_scheme,
)


class TestSchemes:
    def test_qalign_boundaries_exact(self):
        scheme = make_scheme(SchemeKind.QALIGN)
        assert scheme.boundaries == (1.0, 1.8, 2.6, 3.4, 4.2, 5.0)

    def test_deqa_boundaries_and_midpoints_exact(self):
        scheme = make_scheme(SchemeKind.DEQA)
        assert scheme.boundaries == (0.5, 1.5, 2.5, 3.5, 4.5, 5.5)
        assert scheme.midpoints == (1.0, 2.0, 3.0, 4.0, 5.0)

    def test_deqa_interval_3(self):
        scheme = make_scheme(SchemeKind.DEQA)
        assert scheme.boundaries[2] == 2.5 and scheme.boundaries[3] == 3.5

    def test_construction_idempotent(self):
        assert make_scheme("qalign") is make_scheme(SchemeKind.QALIGN)
        assert make_scheme("deqa") is make_scheme(SchemeKind.DEQA)

    def test_qalign_interval_widths(self):
        b = make_scheme(SchemeKind.QALIGN).boundaries
        widths = np.diff(b)
        assert np.allclose(widths, 0.8, atol=1e-12)

    def test_deqa_interval_widths(self):
        b = make_scheme(SchemeKind.DEQA).boundaries
        assert np.allclose(np.diff(b), 1.0, atol=1e-15)

    def test_midpoints_strictly_inside(self):
        for kind in SchemeKind:
            s = make_scheme(kind)
            for i, c in enumerate(s.midpoints):
                assert s.boundaries[i] < c < s.boundaries[i + 1]

    def test_interval_index_membership(self):
        s = make_scheme(SchemeKind.QALIGN)
        assert s.interval_index(1.0) == 1      # closed at the global minimum
        assert s.interval_index(1.8) == 1      # upper edge belongs below
        assert s.interval_index(1.80001) == 2
        assert s.interval_index(5.0) == 5
        with pytest.raises(DomainError):
            s.interval_index(0.99)
        with pytest.raises(DomainError):
            s.interval_index(5.01)

    def test_deqa_interval_index(self):
        s = make_scheme(SchemeKind.DEQA)
        assert s.interval_index(0.5) == 1
        assert s.interval_index(3.0) == 3
        assert s.interval_index(3.5) == 3
        assert s.interval_index(5.5) == 5


class TestMosSample:
    def test_negative_std_rejected(self):
        with pytest.raises(DomainError):
            MosSample(id="a", features=np.zeros(3), mos=3.0, std=-0.1)

    def test_std_optional(self):
        s = MosSample(id="a", features=np.zeros(3), mos=3.0)
        assert s.std is None


class TestEvalReport:
    def test_correlations_bounded(self):
        with pytest.raises(ValidationError):
            EvalReport(
                sample_ids=["a"], predictions=[1.0], targets=[1.0], tokens=[1],
                plcc=1.5, srcc=0.0,
            )

    def test_to_dict_shape(self):
        rep = EvalReport(
            sample_ids=["a", "b"], predictions=[1.0, 2.0], targets=[1.1, 2.2],
            tokens=[1, 2], plcc=0.5, srcc=0.5,
        )
        d = rep.to_dict()
        assert d["schema_version"] == 1
        assert len(d["samples"]) == 2
        assert d["degenerate"] is False
