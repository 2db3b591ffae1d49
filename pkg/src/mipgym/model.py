"""MIP instance model and file I/O.

A :class:`MipInstance` holds variables (with kinds and bounds), linear
constraints, and an objective sense.  Instances are immutable after
construction and can be written to / read from two formats:

* ``.lp`` — a textual subset of the classic LP file format (objective,
  ``Subject To``, ``Bounds``, ``General``, ``Binary`` sections).  The exact
  grammar is documented in ``docs/formats.md``.
* ``.json`` (conventionally ``.mip.json``) — a native structured format
  that additionally carries generator metadata.

Maximization problems keep their original sense here; conversion to the
internal minimization form happens in :meth:`MipInstance.to_linear_program`,
and reported objective values are always in the user's original sense.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, StructureError, UnsupportedFeatureError
from .lp import EQ, GE, INFINITY, LE, ROW_SENSES, LinearProgram

MINIMIZE = "minimize"
MAXIMIZE = "maximize"
SENSES = (MINIMIZE, MAXIMIZE)

BINARY = "binary"
INTEGER = "integer"
CONTINUOUS = "continuous"
VAR_KINDS = (BINARY, INTEGER, CONTINUOUS)

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.#()\[\]]*\Z")


@dataclass(frozen=True)
class Variable:
    name: str
    lower: float = 0.0
    upper: float = INFINITY
    kind: str = CONTINUOUS
    objective: float = 0.0


@dataclass(frozen=True)
class Constraint:
    """Linear row: sum of ``coef * variables[index]`` compared against rhs."""

    name: str
    terms: tuple  # ((var_index, coef), ...)
    sense: str  # one of lp.LE / lp.EQ / lp.GE
    rhs: float

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple((int(j), float(c)) for j, c in self.terms)
        )


@dataclass(frozen=True)
class MipInstance:
    name: str
    sense: str = MINIMIZE
    variables: tuple = ()
    constraints: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "constraints", tuple(self.constraints))

    # -- shape ------------------------------------------------------------

    @property
    def n_vars(self):
        return len(self.variables)

    @property
    def n_constraints(self):
        return len(self.constraints)

    @property
    def variable_names(self):
        return [v.name for v in self.variables]

    def objective_vector(self):
        """Objective coefficients in the user's original sense."""
        return np.array([v.objective for v in self.variables], dtype=float)

    def lower_bounds(self):
        return np.array([v.lower for v in self.variables], dtype=float)

    def upper_bounds(self):
        return np.array([v.upper for v in self.variables], dtype=float)

    def integer_indices(self):
        """Indices of variables with integrality requirements (binary or integer)."""
        return np.array(
            [j for j, v in enumerate(self.variables) if v.kind != CONTINUOUS],
            dtype=int,
        )

    # -- validation -------------------------------------------------------

    def validate(self):
        """Check structural invariants; raises StructureError on violation."""
        if self.sense not in SENSES:
            raise StructureError(f"unknown objective sense {self.sense!r}")
        seen = set()
        for j, v in enumerate(self.variables):
            if not v.name or not _NAME_RE.match(v.name):
                raise StructureError(f"variable {j}: invalid name {v.name!r}")
            if v.name in seen:
                raise StructureError(f"duplicate variable name {v.name!r}")
            seen.add(v.name)
            if v.kind not in VAR_KINDS:
                raise StructureError(f"variable {v.name!r}: unknown kind {v.kind!r}")
            if math.isnan(v.lower) or math.isnan(v.upper):
                raise StructureError(f"variable {v.name!r}: NaN bound")
            if v.lower == INFINITY or v.upper == -INFINITY:
                raise StructureError(f"variable {v.name!r}: bound at the wrong infinity")
            if not math.isfinite(v.objective):
                raise StructureError(f"variable {v.name!r}: non-finite objective coefficient")
            if v.kind == BINARY and not (0.0 <= v.lower <= 1.0 and 0.0 <= v.upper <= 1.0):
                raise StructureError(
                    f"binary variable {v.name!r} has bounds outside [0, 1]"
                )
        n = self.n_vars
        for i, con in enumerate(self.constraints):
            label = con.name or f"constraint {i}"
            if con.sense not in ROW_SENSES:
                raise StructureError(f"{label}: unknown sense {con.sense!r}")
            if not math.isfinite(con.rhs):
                raise StructureError(f"{label}: right-hand side must be finite")
            for j, coef in con.terms:
                if not 0 <= j < n:
                    raise StructureError(f"{label}: term references variable index {j}")
                if not math.isfinite(coef):
                    raise StructureError(f"{label}: non-finite coefficient")
        return self

    # -- conversion -------------------------------------------------------

    def to_linear_program(self):
        """LP relaxation in minimization form (objective negated if maximizing)."""
        c = self.objective_vector()
        if self.sense == MAXIMIZE:
            c = -c
        return LinearProgram(
            objective=c,
            col_lower=self.lower_bounds(),
            col_upper=self.upper_bounds(),
            rows=[list(con.terms) for con in self.constraints],
            row_sense=[con.sense for con in self.constraints],
            row_rhs=np.array([con.rhs for con in self.constraints], dtype=float),
        )

    def objective_value(self, x):
        """Objective of a point in the user's original sense."""
        return float(np.dot(self.objective_vector(), np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class InstanceStats:
    n_vars: int
    n_binary: int
    n_integer: int
    n_continuous: int
    n_constraints: int
    n_nonzeros: int
    objective_density: float


def stats(instance):
    """Size/shape summary of an instance."""
    kinds = [v.kind for v in instance.variables]
    nnz = sum(
        1 for con in instance.constraints for _, coef in con.terms if coef != 0.0
    )
    n = instance.n_vars
    obj_nnz = sum(1 for v in instance.variables if v.objective != 0.0)
    return InstanceStats(
        n_vars=n,
        n_binary=kinds.count(BINARY),
        n_integer=kinds.count(INTEGER),
        n_continuous=kinds.count(CONTINUOUS),
        n_constraints=instance.n_constraints,
        n_nonzeros=nnz,
        objective_density=(obj_nnz / n) if n else 0.0,
    )


def _bounds_close(a, b, tol):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


def instances_equal(a, b, tol=1e-9, check_name=True, check_metadata=False):
    """Semantic equality: same variables (by name), constraints, and sense.

    Variable order may differ; constraint terms are compared as dense
    per-variable coefficient maps with duplicate indices summed.
    """
    if check_name and a.name != b.name:
        return False
    if a.sense != b.sense:
        return False
    if a.n_vars != b.n_vars or a.n_constraints != b.n_constraints:
        return False
    avars = {v.name: v for v in a.variables}
    bvars = {v.name: v for v in b.variables}
    if set(avars) != set(bvars):
        return False
    for name, va in avars.items():
        vb = bvars[name]
        if va.kind != vb.kind:
            return False
        if not _bounds_close(va.lower, vb.lower, tol):
            return False
        if not _bounds_close(va.upper, vb.upper, tol):
            return False
        if abs(va.objective - vb.objective) > tol:
            return False
    for ca, cb in zip(a.constraints, b.constraints):
        if ca.name != cb.name or ca.sense != cb.sense:
            return False
        if abs(ca.rhs - cb.rhs) > tol:
            return False
        da, db = {}, {}
        for j, coef in ca.terms:
            key = a.variables[j].name
            da[key] = da.get(key, 0.0) + coef
        for j, coef in cb.terms:
            key = b.variables[j].name
            db[key] = db.get(key, 0.0) + coef
        for key in set(da) | set(db):
            if abs(da.get(key, 0.0) - db.get(key, 0.0)) > tol:
                return False
    if check_metadata and a.metadata != b.metadata:
        return False
    return True


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def _fmt(v):
    """Exact shortest decimal form of a float."""
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def _expr(pairs):
    """Render [(name, coef), ...] as an LP-format linear expression."""
    parts = []
    for name, coef in pairs:
        if not parts:
            prefix = "-" if coef < 0 else ""
        else:
            prefix = "- " if coef < 0 else "+ "
        parts.append(f"{prefix}{_fmt(abs(coef))} {name}")
    return " ".join(parts)


def _write_lp_text(instance):
    names = instance.variable_names
    out = []
    if instance.name:
        out.append(f"\\ Problem name: {instance.name}")
    out.append("Maximize" if instance.sense == MAXIMIZE else "Minimize")
    obj_pairs = [(v.name, v.objective) for v in instance.variables if v.objective != 0.0]
    out.append(f" obj: {_expr(obj_pairs)}".rstrip())
    out.append("Subject To")
    for i, con in enumerate(instance.constraints):
        acc = {}
        for j, coef in con.terms:
            acc[j] = acc.get(j, 0.0) + coef
        pairs = [(names[j], coef) for j, coef in sorted(acc.items()) if coef != 0.0]
        if not pairs:
            if not names:
                raise StructureError(
                    f"cannot write constraint {con.name!r} of an instance with no variables"
                )
            pairs = [(names[0], 0.0)]
        label = con.name or f"c{i}"
        out.append(f" {label}: {_expr(pairs)} {con.sense} {_fmt(con.rhs)}")
    out.append("Bounds")
    for v in instance.variables:
        lo, up = v.lower, v.upper
        if lo == -INFINITY and up == INFINITY:
            out.append(f" {v.name} free")
        elif lo == up:
            out.append(f" {v.name} = {_fmt(lo)}")
        elif up == INFINITY:
            out.append(f" {v.name} >= {_fmt(lo)}")
        elif lo == -INFINITY:
            out.append(f" -inf <= {v.name} <= {_fmt(up)}")
        else:
            out.append(f" {_fmt(lo)} <= {v.name} <= {_fmt(up)}")
    general = [v.name for v in instance.variables if v.kind == INTEGER]
    if general:
        out.append("General")
        out.append(" " + " ".join(general))
    binaries = [v.name for v in instance.variables if v.kind == BINARY]
    if binaries:
        out.append("Binary")
        out.append(" " + " ".join(binaries))
    out.append("End")
    return "\n".join(out) + "\n"


def _bound_json(v):
    if v == INFINITY:
        return "inf"
    if v == -INFINITY:
        return "-inf"
    return v


def _bound_from_json(v, where):
    if isinstance(v, str):
        if v == "inf":
            return INFINITY
        if v == "-inf":
            return -INFINITY
        raise ParseError(f"{where}: unknown bound value {v!r}")
    if not isinstance(v, (int, float)):
        raise ParseError(f"{where}: bound must be a number or 'inf'/'-inf'")
    return float(v)


def _write_json_text(instance):
    doc = {
        "format": "mip-instance",
        "version": 1,
        "name": instance.name,
        "sense": instance.sense,
        "variables": [
            {
                "name": v.name,
                "lower": _bound_json(v.lower),
                "upper": _bound_json(v.upper),
                "kind": v.kind,
                "objective": v.objective,
            }
            for v in instance.variables
        ],
        "constraints": [
            {
                "name": con.name,
                "terms": [[instance.variables[j].name, coef] for j, coef in con.terms],
                "sense": con.sense,
                "rhs": con.rhs,
            }
            for con in instance.constraints
        ],
        "metadata": instance.metadata,
    }
    return json.dumps(doc, indent=1)


def write_problem(instance, path):
    """Write an instance to ``path``; format chosen by extension (.lp / .json)."""
    instance.validate()
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".lp":
        text = _write_lp_text(instance)
    elif suffix == ".json":
        text = _write_json_text(instance)
    else:
        raise StructureError(
            f"unsupported file extension {suffix!r} for {path} (use .lp or .json)"
        )
    path.write_text(text)


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_.#()\[\]]*)"
    r"|(?P<op><=|>=|=<|=>|[<>=+\-:])"
    r")"
)

_SECTION_KEYWORDS = {
    "minimize": ("objective", MINIMIZE),
    "minimise": ("objective", MINIMIZE),
    "min": ("objective", MINIMIZE),
    "maximize": ("objective", MAXIMIZE),
    "maximise": ("objective", MAXIMIZE),
    "max": ("objective", MAXIMIZE),
    "subject to": ("constraints", None),
    "such that": ("constraints", None),
    "s.t.": ("constraints", None),
    "st": ("constraints", None),
    "bounds": ("bounds", None),
    "bound": ("bounds", None),
    "general": ("general", None),
    "generals": ("general", None),
    "gen": ("general", None),
    "integer": ("general", None),
    "integers": ("general", None),
    "binary": ("binary", None),
    "binaries": ("binary", None),
    "bin": ("binary", None),
    "end": ("end", None),
}

_UNSUPPORTED_SECTIONS = {
    "sos": "SOS constraints",
    "sos1": "SOS constraints",
    "sos2": "SOS constraints",
    "semi-continuous": "semi-continuous variables",
    "semis": "semi-continuous variables",
    "semi": "semi-continuous variables",
    "indicators": "indicator constraints",
}

_INF_NAMES = {"inf", "infinity"}


def _tokenize(line, lineno):
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if not m or m.end() == pos:
            rest = line[pos:].strip()
            if not rest:
                break
            raise ParseError(f"unexpected character {rest[0]!r}", line=lineno)
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), lineno))
        elif m.group("name") is not None:
            tokens.append(("name", m.group("name"), lineno))
        else:
            op = {"=<": "<=", "=>": ">=", "<": "<=", ">": ">="}.get(
                m.group("op"), m.group("op")
            )
            tokens.append(("op", op, lineno))
        pos = m.end()
    return tokens


class _LpReader:
    """Parser for the documented LP-format subset."""

    def __init__(self, text, default_name):
        self.lines = text.splitlines()
        self.name = default_name
        self.sense = None
        self.vars = {}  # name -> {lower, upper, kind, objective}
        self.var_order = []
        self.constraints = []
        self.obj_tokens = []
        self.con_tokens = []
        self.section = None
        self.saw_end = False

    def var(self, name):
        if name not in self.vars:
            self.vars[name] = {
                "lower": None,
                "upper": None,
                "kind": CONTINUOUS,
                "objective": 0.0,
            }
            self.var_order.append(name)
        return self.vars[name]

    # -- linear expressions ----------------------------------------------

    def parse_linear(self, tokens, context):
        """Tokens -> dict name->coef; constants are rejected."""
        coefs = {}
        sign = 1.0
        pending = None  # (value, lineno) awaiting a variable name
        for kind, value, lineno in tokens:
            if kind == "op" and value in "+-":
                if pending is not None:
                    raise ParseError(
                        f"constant term not supported in {context}", line=pending[1]
                    )
                if value == "-":
                    sign = -sign
            elif kind == "num":
                if pending is not None:
                    raise ParseError(
                        f"constant term not supported in {context}", line=pending[1]
                    )
                pending = (sign * float(value), lineno)
                sign = 1.0
            elif kind == "name":
                coef = pending[0] if pending is not None else sign
                self.var(value)
                coefs[value] = coefs.get(value, 0.0) + coef
                pending = None
                sign = 1.0
            else:
                raise ParseError(
                    f"unexpected {value!r} in {context}", line=lineno
                )
        if pending is not None:
            raise ParseError(
                f"constant term not supported in {context}", line=pending[1]
            )
        return coefs

    # -- sections ---------------------------------------------------------

    def strip_label(self, tokens):
        """Remove a leading `name :` label; returns (label, rest)."""
        if (
            len(tokens) >= 2
            and tokens[0][0] == "name"
            and tokens[1][0] == "op"
            and tokens[1][1] == ":"
        ):
            return tokens[0][1], tokens[2:]
        return None, tokens

    def flush_objective(self):
        label, rest = self.strip_label(self.obj_tokens)
        coefs = self.parse_linear(rest, "the objective")
        for name, coef in coefs.items():
            self.var(name)["objective"] = coef
        self.obj_tokens = []

    def finish_constraint(self, tokens):
        label, rest = self.strip_label(tokens)
        split = None
        for i, (kind, value, lineno) in enumerate(rest):
            if kind == "op" and value in ROW_SENSES:
                split = i
                break
        assert split is not None
        lhs, sense_tok, rhs_tokens = rest[:split], rest[split], rest[split + 1:]
        coefs = self.parse_linear(lhs, "a constraint")
        rhs = self.parse_number(rhs_tokens, sense_tok[2], allow_inf=False)
        name = label or f"c{len(self.constraints)}"
        self.constraints.append((name, coefs, sense_tok[1], rhs))

    def parse_number(self, tokens, lineno, allow_inf):
        sign = 1.0
        value = None
        for kind, text, tl in tokens:
            if value is not None:
                raise ParseError(f"unexpected {text!r} after number", line=tl)
            if kind == "op" and text in "+-":
                if text == "-":
                    sign = -sign
            elif kind == "num":
                value = sign * float(text)
            elif kind == "name" and text.lower() in _INF_NAMES and allow_inf:
                value = sign * INFINITY
            else:
                raise ParseError(f"expected a number, found {text!r}", line=tl)
        if value is None:
            raise ParseError("expected a number", line=lineno)
        return value

    def handle_bounds_line(self, tokens, lineno):
        # forms: x free | x = v | x <= v | x >= v | v <= x | v <= x <= v
        #        (and the mirrored >= chain)
        names = [i for i, t in enumerate(tokens) if t[0] == "name"
                 and t[1].lower() not in _INF_NAMES]
        if len(tokens) == 2 and tokens[0][0] == "name" and (
            tokens[1][0] == "name" and tokens[1][1].lower() == "free"
        ):
            rec = self.var(tokens[0][1])
            rec["lower"], rec["upper"] = -INFINITY, INFINITY
            return
        if len(names) != 1:
            raise ParseError("expected exactly one variable in bound", line=lineno)
        vi = names[0]
        name = tokens[vi][1]
        ops = [i for i, t in enumerate(tokens) if t[0] == "op" and t[1] in ("<=", ">=", "=")]
        if not ops:
            raise ParseError("expected a bound relation", line=lineno)
        rec = self.var(name)
        left_op = max((i for i in ops if i < vi), default=None)
        right_op = min((i for i in ops if i > vi), default=None)
        if left_op is not None:
            op = tokens[left_op][1]
            value = self.parse_number(tokens[:left_op], lineno, allow_inf=True)
            if op == "<=":
                rec["lower"] = value
            elif op == ">=":
                rec["upper"] = value
            else:
                rec["lower"] = rec["upper"] = value
        if right_op is not None:
            op = tokens[right_op][1]
            value = self.parse_number(tokens[right_op + 1:], lineno, allow_inf=True)
            if op == "<=":
                rec["upper"] = value
            elif op == ">=":
                rec["lower"] = value
            else:
                rec["lower"] = rec["upper"] = value
        if left_op is None and right_op is None:
            raise ParseError("expected a bound relation", line=lineno)

    def handle_kind_line(self, tokens, lineno, kind):
        for tok_kind, text, tl in tokens:
            if tok_kind != "name":
                raise ParseError(
                    f"expected variable names, found {text!r}", line=tl
                )
            self.var(text)["kind"] = kind

    # -- driver -----------------------------------------------------------

    def read(self):
        any_content = False
        for lineno, raw in enumerate(self.lines, start=1):
            line = raw
            if "\\" in line:
                comment = line[line.index("\\") + 1:].strip()
                m = re.match(r"Problem name:\s*(\S+)", comment, re.IGNORECASE)
                if m:
                    self.name = m.group(1)
                line = line[: line.index("\\")]
            stripped = line.strip()
            if not stripped:
                continue
            lowered = stripped.lower()
            section_hit = None
            for keyword in sorted(_SECTION_KEYWORDS, key=len, reverse=True):
                if lowered == keyword or (
                    lowered.startswith(keyword)
                    and keyword not in ("min", "max", "st", "bin", "gen")
                    and lowered[len(keyword):len(keyword) + 1].isspace()
                ):
                    section_hit = keyword
                    break
            if section_hit is None and lowered in _UNSUPPORTED_SECTIONS:
                raise UnsupportedFeatureError(
                    f"{_UNSUPPORTED_SECTIONS[lowered]} are not supported",
                    line=lineno,
                )
            if section_hit is not None:
                any_content = True
                self.enter_section(section_hit, lineno)
                remainder = stripped[len(section_hit):].strip()
                if remainder:
                    self.handle_body(_tokenize(remainder, lineno), lineno)
                continue
            if self.section is None:
                raise ParseError(
                    "expected an objective section (Minimize/Maximize)", line=lineno
                )
            if self.saw_end:
                raise ParseError("content after End", line=lineno)
            any_content = True
            self.handle_body(_tokenize(stripped, lineno), lineno)
        if not any_content:
            raise ParseError("empty file", line=max(1, len(self.lines)))
        self.close_section(len(self.lines))
        if self.sense is None:
            raise ParseError(
                "expected an objective section (Minimize/Maximize)",
                line=max(1, len(self.lines)),
            )
        return self.build()

    def enter_section(self, keyword, lineno):
        self.close_section(lineno)
        section, sense = _SECTION_KEYWORDS[keyword]
        if section == "objective":
            if self.sense is not None:
                raise ParseError("duplicate objective section", line=lineno)
            self.sense = sense
        elif section == "end":
            self.saw_end = True
        elif self.sense is None:
            raise ParseError(
                "expected an objective section (Minimize/Maximize)", line=lineno
            )
        self.section = section

    def close_section(self, lineno):
        if self.section == "objective":
            self.flush_objective()
        if self.con_tokens:
            raise ParseError(
                "constraint is missing its relation or right-hand side",
                line=self.con_tokens[0][2],
            )

    def handle_body(self, tokens, lineno):
        if not tokens:
            return
        if self.saw_end:
            raise ParseError("content after End", line=lineno)
        if self.section == "objective":
            for kind, value, tl in tokens:
                if kind == "op" and value in ROW_SENSES:
                    raise ParseError(
                        "relation not allowed in the objective", line=tl
                    )
            self.obj_tokens.extend(tokens)
        elif self.section == "constraints":
            self.con_tokens.extend(tokens)
            has_sense = any(
                k == "op" and v in ROW_SENSES for k, v, _ in self.con_tokens
            )
            if has_sense:
                idx = next(
                    i for i, (k, v, _) in enumerate(self.con_tokens)
                    if k == "op" and v in ROW_SENSES
                )
                after = self.con_tokens[idx + 1:]
                if any(k == "num" for k, _, _ in after):
                    self.finish_constraint(self.con_tokens)
                    self.con_tokens = []
        elif self.section == "bounds":
            self.handle_bounds_line(tokens, lineno)
        elif self.section == "general":
            self.handle_kind_line(tokens, lineno, INTEGER)
        elif self.section == "binary":
            self.handle_kind_line(tokens, lineno, BINARY)
        else:
            raise ParseError("unexpected content", line=lineno)

    def build(self):
        variables = []
        index = {}
        for name in self.var_order:
            rec = self.vars[name]
            lo = 0.0 if rec["lower"] is None else rec["lower"]
            up = INFINITY if rec["upper"] is None else rec["upper"]
            if rec["kind"] == BINARY:
                lo = max(lo, 0.0)
                up = min(up, 1.0)
            index[name] = len(variables)
            variables.append(
                Variable(name, lo, up, rec["kind"], rec["objective"])
            )
        constraints = []
        for name, coefs, sense, rhs in self.constraints:
            terms = tuple(
                (index[v], coef) for v, coef in coefs.items() if coef != 0.0
            )
            constraints.append(Constraint(name, terms, sense, rhs))
        return MipInstance(
            name=self.name,
            sense=self.sense,
            variables=variables,
            constraints=constraints,
        ).validate()


def _read_json_text(text, default_name):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError("expected a JSON object at top level")
    if doc.get("format") != "mip-instance":
        raise UnsupportedFeatureError(
            f"unknown document format {doc.get('format')!r}"
        )
    if doc.get("version") != 1:
        raise UnsupportedFeatureError(
            f"unsupported format version {doc.get('version')!r}"
        )
    sense = doc.get("sense", MINIMIZE)
    variables = []
    index = {}
    for i, rec in enumerate(doc.get("variables", [])):
        where = f"variables[{i}]"
        try:
            name = rec["name"]
        except (TypeError, KeyError):
            raise ParseError(f"{where}: missing name") from None
        index[name] = len(variables)
        variables.append(
            Variable(
                name=name,
                lower=_bound_from_json(rec.get("lower", 0.0), where),
                upper=_bound_from_json(rec.get("upper", "inf"), where),
                kind=rec.get("kind", CONTINUOUS),
                objective=float(rec.get("objective", 0.0)),
            )
        )
    constraints = []
    for i, rec in enumerate(doc.get("constraints", [])):
        where = f"constraints[{i}]"
        try:
            terms = tuple(
                (index[vname], float(coef)) for vname, coef in rec["terms"]
            )
            constraints.append(
                Constraint(
                    name=rec.get("name", f"c{i}"),
                    terms=terms,
                    sense=rec["sense"],
                    rhs=float(rec["rhs"]),
                )
            )
        except KeyError as exc:
            raise ParseError(f"{where}: missing or unknown {exc.args[0]!r}") from None
    return MipInstance(
        name=doc.get("name") or default_name,
        sense=sense,
        variables=variables,
        constraints=constraints,
        metadata=doc.get("metadata", {}) or {},
    ).validate()


def read_problem(path):
    """Read an instance from ``path``; format chosen by extension (.lp / .json)."""
    path = Path(path)
    text = path.read_text()
    default_name = path.name
    for suffix in (".mip.json", ".json", ".lp"):
        if path.name.lower().endswith(suffix):
            default_name = path.name[: -len(suffix)]
            break
    suffix = path.suffix.lower()
    if suffix == ".lp":
        return _LpReader(text, default_name).read()
    if suffix == ".json":
        return _read_json_text(text, default_name)
    raise StructureError(
        f"unsupported file extension {suffix!r} for {path} (use .lp or .json)"
    )
