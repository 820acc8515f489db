import json

import pytest

from affinelag.geometry import build_lagrangian
from affinelag.problem import ProblemError, bundled_problems, load_problem, problem_from_dict

BASE = {
    "name": "pair",
    "coordinates": ["q1", "q2"],
    "one_form": {"m": ["q2", "0"], "V": "q1^2/2"},
}


def with_(**changes):
    d = json.loads(json.dumps(BASE))
    d.update(changes)
    return d


def test_bundled_corpus():
    names = bundled_problems()
    for n in ("lotka_volterra", "regular_four", "type_ii1", "type_ii2", "type_ii2_time", "type_ii3", "harmonic_oscillator"):
        assert n in names


def test_paths_fall_back_to_bundled_files():
    assert load_problem("examples/type_ii3.json").name == "type_ii3"
    assert load_problem("lotka_volterra").parameter_values() == {"a": 2.0, "b": 1.0}
    with pytest.raises(ProblemError, match="no such problem"):
        load_problem("does_not_exist.json")


def test_reads_a_file(tmp_path):
    p = tmp_path / "pair.json"
    p.write_text(json.dumps(BASE))
    spec = load_problem(p)
    assert spec.mode == "one_form" and spec.coordinates == ("q1", "q2")
    assert build_lagrangian(spec).expr == spec.table().parse("q2*v_q1 - q1^2/2")


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    with pytest.raises(ProblemError, match="invalid JSON"):
        load_problem(p)


@pytest.mark.parametrize(
    "data,message",
    [
        (with_(one_form={"m": ["q2"], "V": "0"}), "has 1 entries"),
        (with_(hamiltonian={"H": "q1"}), "exactly one"),
        (with_(coordinates=[]), "coordinates"),
        (with_(coordinates=["q1", "q1"]), "duplicate"),
        (with_(one_form={"m": ["q2 +", "0"], "V": "0"}), "position"),
        (with_(one_form={"m": ["z", "0"], "V": "0"}), "'z'"),
        (with_(parameters=[{"name": "k", "assumption": "huge"}]), "assumption"),
        (with_(parameters=[{"name": "k", "value": "2"}]), "number"),
        ({"coordinates": ["q", "p"], "hamiltonian": {"H": "p", "pairs": 2}}, "half"),
    ],
)
def test_validation(data, message):
    with pytest.raises(ProblemError, match=message):
        problem_from_dict(data)


def test_hamiltonian_mode():
    spec = problem_from_dict({"coordinates": ["q", "p"], "hamiltonian": {"H": "(p^2 + q^2)/2"}})
    assert spec.mode == "hamiltonian" and spec.pairs == 1
    assert list(build_lagrangian(spec).m) == [spec.table().parse("p"), spec.table().parse("0")]


def test_round_trip_through_json():
    spec = load_problem("type_ii2_time")
    again = problem_from_dict(spec.to_json(), spec.source)
    assert again == spec
