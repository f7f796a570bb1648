import json

import numpy as np
import pytest

from approxred.core import InputError
from approxred.user_systems import (
    compile_expression,
    load_system_config,
    system_from_dict,
)


def demo_doc():
    return {
        "name": "demo",
        "state": ["y", "z"],
        "m": 1,
        "params": {"a": 2.0},
        "rhs": ["-a*y", "-z + 0.5*y"],
        "x0": [1.0, 0.5],
    }


class TestExpressionLanguage:
    def test_arithmetic_and_precedence(self):
        fn = compile_expression("a + 2*y**2", ["y", "a"])
        assert fn({"y": 3.0, "a": 1.0}) == 19.0

    def test_left_to_right_association(self):
        fn = compile_expression("y - z - 1", ["y", "z"])
        assert fn({"y": 10.0, "z": 4.0}) == 5.0
        fn = compile_expression("y / z / 2", ["y", "z"])
        assert fn({"y": 8.0, "z": 2.0}) == 2.0

    def test_trig_calls(self):
        fn = compile_expression("sin(y)*cos(y)", ["y"])
        assert fn({"y": 0.3}) == pytest.approx(np.sin(0.3) * np.cos(0.3))

    def test_unary_minus(self):
        fn = compile_expression("-y + -2", ["y"])
        assert fn({"y": 1.0}) == -3.0

    def test_unknown_name_rejected(self):
        with pytest.raises(InputError):
            compile_expression("-a*y", ["y"])

    def test_attribute_access_rejected(self):
        with pytest.raises(InputError):
            compile_expression("y.real", ["y"])

    def test_calls_other_than_trig_rejected(self):
        with pytest.raises(InputError):
            compile_expression("exp(y)", ["y"])
        with pytest.raises(InputError):
            compile_expression("__import__('os')", ["y"])

    def test_comparison_rejected(self):
        with pytest.raises(InputError):
            compile_expression("y < 1", ["y"])

    def test_string_literal_rejected(self):
        with pytest.raises(InputError):
            compile_expression("'abc'", ["y"])


class TestSystemFromConfig:
    def test_round_trip_evaluation(self):
        entry, registry = system_from_dict(demo_doc())
        assert entry.field.n == 2
        assert entry.decomp.m == 1
        out = entry.field([2.0, 1.0])
        assert np.allclose(out, [-4.0, 0.0], atol=0)
        assert np.allclose(entry.field([0.0, 1.0]), [0.0, -1.0], atol=0)
        assert np.array_equal(entry.default_ic, [1.0, 0.5])
        assert "demo" in registry

    def test_batched_evaluation(self):
        entry, _ = system_from_dict(demo_doc())
        X = np.array([[2.0, 1.0], [0.0, 4.0]])
        out = entry.field.rhs(X)
        assert out.shape == (2, 2)
        assert np.allclose(out[1], [0.0, -4.0], atol=0)

    def test_missing_key(self):
        doc = demo_doc()
        del doc["rhs"]
        with pytest.raises(InputError):
            system_from_dict(doc)

    def test_rhs_count_must_match_state(self):
        doc = demo_doc()
        doc["rhs"] = ["-y"]
        with pytest.raises(InputError):
            system_from_dict(doc)

    def test_m_range_checked(self):
        doc = demo_doc()
        doc["m"] = 2
        with pytest.raises(InputError):
            system_from_dict(doc)

    def test_duplicate_state_names(self):
        doc = demo_doc()
        doc["state"] = ["y", "y"]
        with pytest.raises(InputError):
            system_from_dict(doc)

    def test_state_param_clash(self):
        doc = demo_doc()
        doc["params"] = {"y": 1.0}
        with pytest.raises(InputError):
            system_from_dict(doc)

    def test_x0_length_checked(self):
        doc = demo_doc()
        doc["x0"] = [1.0]
        with pytest.raises(InputError):
            system_from_dict(doc)

    def test_load_from_file(self, tmp_path):
        path = tmp_path / "demo.json"
        path.write_text(json.dumps(demo_doc()))
        entry, registry = load_system_config(path)
        assert entry.name == "demo"
        factory, defaults = registry["demo"]
        resolved = factory({**defaults, "a": 3.0})
        assert resolved.field([1.0, 0.0])[0] == -3.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_system_config(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(InputError):
            load_system_config(path)
