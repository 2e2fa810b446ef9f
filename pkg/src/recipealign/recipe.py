"""Recipe-structure extraction from dependency-annotated step sentences.

Input is CoNLL-U (10 tab-separated columns, blank line between sentences,
one sentence per recipe step, in order). Extraction walks the dependency
tree of each step:

  * actions: lemmas of verbs that govern a direct object (``obj``/``dobj``);
    if the step has no direct object, the root verb.
  * primary objects: the direct-object nouns, plus nouns conjoined to them.
  * secondary objects: nouns hanging off an action verb through a nominal
    modifier relation (``nmod``/``obl``) marked by a preposition.

Pronouns left in direct-object position ("it", "them", "they") are resolved
to the most recent earlier step that has a primary object; the resolution
adds that step as an ordering prerequisite. A sidecar JSON file can override
individual resolutions:

    {"overrides": [[step, token_index, antecedent_step, antecedent_lemma]]}
"""

import json
import logging
from dataclasses import dataclass, field, replace

from .errors import SchemaError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Token:
    index: int  # 1-based position within the sentence
    form: str
    lemma: str
    upos: str
    head: int  # 0 = root
    deprel: str

    @property
    def relation(self) -> str:
        """Dependency relation without subtype (``nmod:into`` -> ``nmod``)."""
        return self.deprel.split(":", 1)[0]


@dataclass(frozen=True)
class RecipeStep:
    index: int  # 1-based recipe step number
    text: str
    tokens: tuple[Token, ...]

    def token_at(self, index: int) -> Token | None:
        for tok in self.tokens:
            if tok.index == index:
                return tok
        return None


@dataclass
class ParsedStep:
    index: int
    actions: list[str]
    primary_objects: list[str]
    secondary_objects: list[str]
    prerequisites: set[int] = field(default_factory=set)
    degenerate: bool = False


@dataclass
class ParsedRecipe:
    steps: list[ParsedStep]
    warnings: list[str] = field(default_factory=list)

    @property
    def num_steps(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class ExtractionRules:
    """Dependency-label map; defaults accept both Stanford and UD v2 labels."""

    object_relations: frozenset[str] = frozenset({"obj", "dobj"})
    modifier_relations: frozenset[str] = frozenset({"nmod", "obl"})
    conj_relation: str = "conj"
    case_relation: str = "case"
    verb_tags: frozenset[str] = frozenset({"VERB"})
    noun_tags: frozenset[str] = frozenset({"NOUN", "PROPN", "PRON"})


DEFAULT_RULES = ExtractionRules()

PRONOUN_ANTECEDENTS = {"it": "singular", "them": "plural", "they": "plural"}


def parse_conllu(text: str, path: str = "<string>") -> list[RecipeStep]:
    """Parse CoNLL-U text into one RecipeStep per sentence, validating trees."""
    steps: list[RecipeStep] = []
    tokens: list[Token] = []
    step_text = ""
    first_line = 0

    def flush():
        nonlocal tokens, step_text, first_line
        if tokens:
            step = RecipeStep(index=len(steps) + 1, text=step_text, tokens=tuple(tokens))
            _validate_tree(step, path, first_line)
            steps.append(step)
        tokens = []
        step_text = ""
        first_line = 0

    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("text"):
                _, _, value = body.partition("=")
                step_text = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise SchemaError(f"expected 10 columns, got {len(cols)}", path=path, line=lineno)
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue  # multiword-token ranges and empty nodes carry no tree edges
        try:
            index = int(tok_id)
            head = int(cols[6])
        except ValueError as exc:
            raise SchemaError(f"non-integer ID or HEAD: {exc}", path=path, line=lineno) from exc
        if not tokens:
            first_line = lineno
        tokens.append(
            Token(
                index=index,
                form=cols[1],
                lemma=cols[2].lower(),
                upos=cols[3],
                head=head,
                deprel=cols[7],
            )
        )
    flush()
    if not steps:
        raise SchemaError("no sentences found", path=path)
    return steps


def load_conllu(path) -> list[RecipeStep]:
    """Read one RecipeStep per sentence, validating the dependency trees."""
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        return parse_conllu(fh.read(), path=path)


def _validate_tree(step: RecipeStep, path: str, line: int) -> None:
    ids = {tok.index for tok in step.tokens}
    roots = [tok for tok in step.tokens if tok.head == 0]
    if len(roots) != 1:
        raise ValidationError(
            f"sentence starting at {path} line {line} has {len(roots)} roots", field="head"
        )
    children: dict[int, list[int]] = {}
    for tok in step.tokens:
        if tok.head != 0 and tok.head not in ids:
            raise ValidationError(
                f"token {tok.index} points to missing head {tok.head}", field="head"
            )
        children.setdefault(tok.head, []).append(tok.index)
    # every token must be reachable from the root (rejects cycles)
    seen: set[int] = set()
    stack = [0]
    while stack:
        node = stack.pop()
        for child in children.get(node, ()):
            if child not in seen:
                seen.add(child)
                stack.append(child)
    if seen != ids:
        raise ValidationError(
            f"head links do not form a tree (cycle among tokens {sorted(ids - seen)})",
            field="head",
        )


def extract_pairs(step: RecipeStep, rules: ExtractionRules = DEFAULT_RULES) -> ParsedStep:
    """Extract actions and primary/secondary objects from one step's tree."""
    by_index = {tok.index: tok for tok in step.tokens}
    children: dict[int, list[Token]] = {}
    for tok in step.tokens:
        children.setdefault(tok.head, []).append(tok)

    root = next(tok for tok in step.tokens if tok.head == 0)

    actions: list[str] = []
    action_indices: set[int] = set()
    primaries: list[Token] = []

    for tok in step.tokens:
        if tok.relation in rules.object_relations and tok.upos in rules.noun_tags:
            head = by_index.get(tok.head)
            if head is not None and head.upos in rules.verb_tags:
                if head.index not in action_indices:
                    action_indices.add(head.index)
                    actions.append(head.lemma)
                primaries.append(tok)

    if not actions:
        if root.upos in rules.verb_tags:
            actions.append(root.lemma)
            action_indices.add(root.index)
        else:
            return ParsedStep(
                index=step.index,
                actions=[],
                primary_objects=[],
                secondary_objects=[],
                degenerate=True,
            )

    # conjunction closure: nouns conjoined to a primary object are primary too
    primary_indices = {tok.index for tok in primaries}
    changed = True
    while changed:
        changed = False
        for tok in step.tokens:
            if (
                tok.index not in primary_indices
                and tok.relation == rules.conj_relation
                and tok.head in primary_indices
                and tok.upos in rules.noun_tags
            ):
                primary_indices.add(tok.index)
                primaries.append(tok)
                changed = True
    primaries.sort(key=lambda tok: tok.index)

    secondaries: list[Token] = []
    for tok in step.tokens:
        if (
            tok.relation in rules.modifier_relations
            and tok.head in action_indices
            and tok.upos in rules.noun_tags
            and tok.index not in primary_indices
        ):
            has_case = any(
                child.relation == rules.case_relation for child in children.get(tok.index, ())
            ) or ":" in tok.deprel
            if has_case:
                secondaries.append(tok)

    def lemmas(tokens: list[Token]) -> list[str]:
        out = []
        for tok in tokens:
            if tok.lemma not in out:
                out.append(tok.lemma)
        return out

    return ParsedStep(
        index=step.index,
        actions=actions,
        primary_objects=lemmas(primaries),
        secondary_objects=lemmas(secondaries),
    )


def load_coref_overrides(path) -> list[tuple[int, int, int, str]]:
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON: {exc.msg}", path=path, line=exc.lineno) from exc
    entries = raw.get("overrides")
    if not isinstance(entries, list):
        raise SchemaError("missing 'overrides' list", path=path)
    out = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, (list, tuple)) or len(entry) != 4:
            raise SchemaError(
                f"overrides[{i}] is not [step, token_index, antecedent_step, antecedent_lemma]",
                path=path,
            )
        out.append((int(entry[0]), int(entry[1]), int(entry[2]), str(entry[3])))
    return out


def resolve_coreference(
    steps: list[ParsedStep],
    raw: list[RecipeStep] | None = None,
    overrides: list[tuple[int, int, int, str]] | None = None,
) -> ParsedRecipe:
    """Replace direct-object pronouns with earlier-step antecedents.

    "it" takes the last primary object of the nearest earlier step that has
    one; "them"/"they" take that step's full primary list. Either way the
    antecedent step becomes a prerequisite of the referring step. Pronouns
    with no possible antecedent are dropped with a warning.
    """
    override_map: dict[tuple[int, str], tuple[int, str]] = {}
    if overrides:
        raw_by_index = {s.index: s for s in raw} if raw else {}
        for step_idx, token_idx, ante_step, ante_lemma in overrides:
            raw_step = raw_by_index.get(step_idx)
            token = raw_step.token_at(token_idx) if raw_step else None
            if token is None:
                raise ValidationError(
                    f"override points at missing token {token_idx} of step {step_idx}",
                    field="overrides",
                )
            if ante_step >= step_idx:
                raise ValidationError(
                    f"override antecedent step {ante_step} not earlier than {step_idx}",
                    field="overrides",
                )
            override_map[(step_idx, token.lemma)] = (ante_step, ante_lemma)

    resolved: list[ParsedStep] = []
    warnings: list[str] = []
    for step in steps:
        new_primary: list[str] = []
        prereqs = set(step.prerequisites)
        for lemma in step.primary_objects:
            if lemma not in PRONOUN_ANTECEDENTS:
                new_primary.append(lemma)
                continue
            if (step.index, lemma) in override_map:
                ante_step, ante_lemma = override_map[(step.index, lemma)]
                new_primary.append(ante_lemma)
                prereqs.add(ante_step)
                continue
            antecedent = _nearest_antecedent(resolved, step.index)
            if antecedent is None:
                msg = f"step {step.index}: pronoun '{lemma}' has no earlier antecedent; dropped"
                warnings.append(msg)
                logger.warning(msg)
                continue
            if PRONOUN_ANTECEDENTS[lemma] == "singular":
                new_primary.append(antecedent.primary_objects[-1])
            else:
                new_primary.extend(antecedent.primary_objects)
            prereqs.add(antecedent.index)
        deduped = []
        for lemma in new_primary:
            if lemma not in deduped:
                deduped.append(lemma)
        resolved.append(replace(step, primary_objects=deduped, prerequisites=prereqs))

    for step in resolved:
        for prereq in step.prerequisites:
            if prereq >= step.index:
                raise ValidationError(
                    f"step {step.index} prerequisite {prereq} is not an earlier step",
                    field="prerequisites",
                )
    return ParsedRecipe(steps=resolved, warnings=warnings)


def _nearest_antecedent(resolved: list[ParsedStep], before: int) -> ParsedStep | None:
    for step in reversed(resolved):
        if step.index < before and step.primary_objects:
            return step
    return None


def parse_recipe(path, sidecar=None, rules: ExtractionRules = DEFAULT_RULES) -> ParsedRecipe:
    """load_conllu + extract_pairs + resolve_coreference in one call."""
    raw = load_conllu(path)
    steps = [extract_pairs(step, rules) for step in raw]
    overrides = load_coref_overrides(sidecar) if sidecar else None
    return resolve_coreference(steps, raw, overrides)
