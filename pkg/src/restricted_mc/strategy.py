"""Strategy access, replay checks and the JSON decision-tree format."""

from __future__ import annotations

import json
from collections.abc import Callable, Mapping, Sequence
from fractions import Fraction
from pathlib import Path
from typing import Any

from restricted_mc.algebra import ExtendedOutput
from restricted_mc.errors import MalformedStrategy
from restricted_mc.models import (
    Action,
    Answer,
    AskInfo,
    AskRand,
    Entry,
    FiniteRestriction,
    InfoQuery,
    Problem,
    RandQuery,
    Stop,
    Strategy,
    Transcript,
    TreeNode,
    WellFormednessReport,
    ensure_transcript,
)

DEFAULT_REPLAY_BUDGET = 12


def action_at(strategy: Strategy, transcript: Transcript | Sequence[Entry]) -> Action:
    """Return the strategy's action after the given transcript.

    Args:
        strategy: Strategy to consult
        transcript: Transcript, or a sequence of (query, answer) entries

    Returns:
        The action chosen by the strategy

    Raises:
        MalformedTranscript: If an answer tag does not match its query
        MalformedStrategy: If the strategy returns something that is not an action
    """
    action = strategy.policy(ensure_transcript(transcript))
    if isinstance(action, AskInfo) and isinstance(action.query, InfoQuery):
        return action
    if isinstance(action, AskRand) and isinstance(action.query, RandQuery):
        return action
    if isinstance(action, Stop):
        return action
    msg = f"Strategy '{strategy.name}' returned a non-action: {action!r}"
    raise MalformedStrategy(msg)


# Decision trees


def stop(output: Any) -> TreeNode:
    """Leaf node."""
    return TreeNode("stop", output=output)


def ask_info(param: Any, children: Mapping[Any, TreeNode]) -> TreeNode:
    """Information node branching on the answer to f(param)."""
    return TreeNode("info", query=param, children=dict(children))


def ask_rand(index: int, children: Mapping[Any, TreeNode]) -> TreeNode:
    """Random node branching on the value of ξ_index."""
    return TreeNode("rand", query=index, children=dict(children))


def _node_action(node: TreeNode) -> Action:
    if node.kind == "stop":
        return Stop(node.output)
    if node.kind == "info":
        return AskInfo(InfoQuery(node.query))
    return AskRand(RandQuery(node.query))


def tree_policy(tree: TreeNode) -> Callable[[Transcript], Action]:
    """Policy that walks ``tree`` along a transcript.

    Raises:
        MalformedStrategy: (from the policy) when the transcript leaves the tree
    """

    def policy(transcript: Transcript) -> Action:
        node = tree
        for query, answer in transcript:
            expected = node.kind
            key = query.param if isinstance(query, InfoQuery) else query.index
            if expected == "stop" or answer.kind != expected or key != node.query:
                msg = f"Transcript entry ({query!r}, {answer!r}) does not follow the tree at a '{expected}' node"
                raise MalformedStrategy(msg)
            if answer.value not in node.children:
                msg = f"Tree has no branch for answer {answer.value!r} at query {node.query!r}"
                raise MalformedStrategy(msg)
            node = node.children[answer.value]
        return _node_action(node)

    return policy


def tree_caps(tree: TreeNode) -> tuple[int, int]:
    """Maximum (info, rand) call counts along any root-to-leaf path."""
    if tree.kind == "stop":
        return 0, 0
    child_caps = [tree_caps(child) for child in tree.children.values()]
    info = max((c[0] for c in child_caps), default=0)
    rand = max((c[1] for c in child_caps), default=0)
    if tree.kind == "info":
        return info + 1, rand
    return info, rand + 1


def tree_strategy(
    tree: TreeNode,
    name: str = "tree",
    caps: tuple[int, int] | None = None,
    fallback_output: Any = 0,
) -> Strategy:
    """Wrap a decision tree as a strategy; caps default to the tree's path maxima."""
    return Strategy(
        name=name,
        policy=tree_policy(tree),
        caps=caps if caps is not None else tree_caps(tree),
        tree=tree,
        fallback_output=fallback_output,
    )


def worst_case_expected_cards(tree: TreeNode, restriction: FiniteRestriction) -> tuple[Fraction, Fraction]:
    """Input-independent upper bound on expected (info, rand) cardinalities.

    Information nodes take the worst answer, random nodes average over the
    positive-probability values of the restriction.

    Raises:
        MalformedStrategy: If a random node lacks a branch for a possible value
    """
    if tree.kind == "stop":
        return Fraction(0), Fraction(0)
    if tree.kind == "info":
        child_costs = [worst_case_expected_cards(child, restriction) for child in tree.children.values()]
        info = max((c[0] for c in child_costs), default=Fraction(0))
        rand = max((c[1] for c in child_costs), default=Fraction(0))
        return info + 1, rand
    info = Fraction(0)
    rand = Fraction(1)
    for value, probability in restriction.support(RandQuery(tree.query)):
        if value not in tree.children:
            msg = f"Random node {tree.query} has no branch for value {value!r}"
            raise MalformedStrategy(msg)
        child_info, child_rand = worst_case_expected_cards(tree.children[value], restriction)
        info += probability * child_info
        rand += probability * child_rand
    return info, rand


def _encode_output(value: Any) -> Any:
    if isinstance(value, ExtendedOutput):
        return {"value": _encode_output(value.value), "flag": _encode_output(value.flag)}
    if isinstance(value, tuple):
        return [_encode_output(x) for x in value]
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else str(value)
    return value


def _decode_output(value: Any) -> Any:
    if isinstance(value, dict) and set(value) == {"value", "flag"}:
        return ExtendedOutput(_decode_output(value["value"]), _decode_output(value["flag"]))
    if isinstance(value, list):
        return tuple(_decode_output(x) for x in value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            return value
    return value


def _decode_key(key: str) -> Any:
    try:
        return int(key)
    except ValueError:
        pass
    try:
        return Fraction(key)
    except ValueError:
        return key


def tree_to_dict(tree: TreeNode) -> dict[str, Any]:
    """Encode a tree in the JSON decision-tree format."""
    return {
        "kind": tree.kind,
        "query": _encode_output(tree.query),
        "children": {str(_encode_output(key)): tree_to_dict(child) for key, child in tree.children.items()},
        "output": _encode_output(tree.output),
    }


def tree_from_dict(data: Mapping[str, Any]) -> TreeNode:
    """Decode a tree from the JSON decision-tree format.

    Raises:
        MalformedStrategy: If a node is missing fields or has an unknown kind
    """
    kind = data.get("kind")
    if kind not in ("info", "rand", "stop"):
        msg = f"Unknown decision-tree node kind: {kind!r}"
        raise MalformedStrategy(msg)
    children_data: Mapping[str, Any] = data.get("children") or {}
    if kind == "stop":
        if children_data:
            msg = "Stop node must not have children"
            raise MalformedStrategy(msg)
        return TreeNode("stop", output=_decode_output(data.get("output")))
    if not children_data:
        msg = f"'{kind}' node at query {data.get('query')!r} has no children"
        raise MalformedStrategy(msg)
    query = _decode_output(data.get("query"))
    if kind == "rand" and not (isinstance(query, int) and query >= 1):
        msg = f"Random node query must be an index >= 1, got {query!r}"
        raise MalformedStrategy(msg)
    children = {_decode_key(key): tree_from_dict(child) for key, child in children_data.items()}
    return TreeNode(kind, query=query, children=children)


def save_tree(tree: TreeNode, path: str | Path, metadata: Mapping[str, Any] | None = None) -> Path:
    """Write a tree as JSON with sorted keys; ``metadata`` fields go next to ``tree``."""
    output_path = Path(path)
    document: dict[str, Any] = {"tree": tree_to_dict(tree)}
    if metadata:
        document.update(metadata)
    with output_path.open("w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write("\n")
    return output_path


def load_tree_strategy(
    path: str | Path,
    restriction: FiniteRestriction | None = None,
    problem: Problem | None = None,
) -> Strategy:
    """Load a strategy from a decision-tree JSON file.

    The file holds either a bare node or an object with ``tree`` and the
    optional fields ``name``, ``caps`` and ``fallback_output``.  When a
    restriction and a problem are given, the loaded tree is replayed with
    :func:`assert_well_formed` before it is returned.

    Raises:
        FileNotFoundError: If the file does not exist
        MalformedStrategy: If the tree is malformed or fails the replay battery
    """
    tree_file = Path(path)
    if not tree_file.exists():
        msg = f"Strategy file not found: {path}"
        raise FileNotFoundError(msg)
    with tree_file.open(encoding="utf-8") as f:
        data: dict[str, Any] = json.load(f)
    if "kind" in data:
        strategy = tree_strategy(tree_from_dict(data), name=tree_file.stem)
    else:
        caps_data = data.get("caps")
        strategy = tree_strategy(
            tree_from_dict(data["tree"]),
            name=str(data.get("name", tree_file.stem)),
            caps=(int(caps_data[0]), int(caps_data[1])) if caps_data is not None else None,
            fallback_output=_decode_output(data.get("fallback_output", 0)),
        )
    if restriction is not None and problem is not None:
        report = assert_well_formed(strategy, restriction, problem)
        if not report.ok:
            findings = [
                *report.purity_violations,
                *report.invalid_queries,
                *report.cap_violations,
                *report.policy_errors,
            ]
            msg = f"Strategy file {path} is not well formed on {problem.name}: {findings[0]}"
            raise MalformedStrategy(msg)
    return strategy


# Replay battery


class _Replay:
    def __init__(
        self,
        strategy: Strategy,
        restriction: FiniteRestriction,
        problem: Problem,
        replay_budget: int,
        info_answers: Callable[[InfoQuery], Sequence[Any]],
        report: WellFormednessReport,
    ) -> None:
        self.strategy = strategy
        self.restriction = restriction
        self.problem = problem
        self.replay_budget = replay_budget
        self.info_answers = info_answers
        self.report = report

    def walk(self, transcript: Transcript, info: int, rand: int) -> None:
        report = self.report
        report.transcripts_checked += 1
        caps = self.strategy.caps
        if caps is not None and (info > caps[0] or rand > caps[1]):
            report.cap_violations.append(f"cards ({info}, {rand}) exceed caps {caps} after {list(transcript)!r}")
            return
        try:
            action = action_at(self.strategy, transcript)
            again = action_at(self.strategy, Transcript(list(transcript)))
        except MalformedStrategy as e:
            report.invalid_queries.append(str(e))
            return
        except Exception as e:  # noqa: BLE001
            report.policy_errors.append(f"{type(e).__name__}: {e} after {list(transcript)!r}")
            return
        if action != again:
            report.purity_violations.append(f"{action!r} != {again!r} after {list(transcript)!r}")
            return
        if isinstance(action, Stop):
            observed = report.observed_caps
            report.observed_caps = (max(observed[0], info), max(observed[1], rand))
            return
        if len(transcript) >= self.replay_budget:
            report.truncated = True
            return
        if isinstance(action, AskInfo):
            if not self.problem.is_valid_query(action.query):
                report.invalid_queries.append(f"invalid query {action.query!r} after {list(transcript)!r}")
                return
            for value in self.info_answers(action.query):
                self.walk(transcript.extend(action.query, Answer.info(value)), info + 1, rand)
            return
        for value, _ in self.restriction.support(action.query):
            self.walk(transcript.extend(action.query, Answer.rand(value)), info, rand + 1)


def assert_well_formed(
    strategy: Strategy,
    restriction: FiniteRestriction,
    problem: Problem,
    replay_budget: int = DEFAULT_REPLAY_BUDGET,
) -> WellFormednessReport:
    """Replay a deterministic battery of transcripts and collect findings.

    With a finite answer alphabet every combination of information answers
    and positive-probability random values is replayed up to ``replay_budget``
    calls; otherwise the information answers come from the problem's test
    inputs.  Never raises for strategy defects: they land in the report.

    Args:
        strategy: Strategy under test
        restriction: Finite restriction supplying random values
        problem: Problem supplying query validity and answers
        replay_budget: Maximum transcript length explored

    Returns:
        WellFormednessReport with purity, query, cap and policy-error findings
    """
    report = WellFormednessReport(declared_caps=strategy.caps)
    alphabet = problem.answer_alphabet
    if alphabet is not None:
        replay = _Replay(strategy, restriction, problem, replay_budget, lambda _q: alphabet, report)
        replay.walk(Transcript(), 0, 0)
        report.exhaustive = not report.truncated
        return report
    for f in problem.test_inputs():
        replay = _Replay(strategy, restriction, problem, replay_budget, _answers_of(problem, f), report)
        replay.walk(Transcript(), 0, 0)
    return report


def _answers_of(problem: Problem, f: Any) -> Callable[[InfoQuery], Sequence[Any]]:
    def answers(query: InfoQuery) -> Sequence[Any]:
        return (problem.evaluate(f, query),)

    return answers
