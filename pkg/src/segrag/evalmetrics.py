"""Generation metrics (BLEU, ROUGE-1/2/L) and Welch's t-test.

All metrics share one tokenization, defined in textutil: case-fold and
split on non-alphanumeric runs. Scores are reported in [0,1]; published
tables that look 100x larger are the same numbers scaled.

The t-test p-value comes from the regularized incomplete beta function,
evaluated with a Lentz-style continued fraction, so scoring needs no
statistics dependency at runtime.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass

from .corpus import QARecord
from .errors import ValidationError
from .ioutil import read_jsonl, write_jsonl
from .textutil import tokenize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricRow:
    qid: str
    bleu: float
    rouge1: float
    rouge2: float
    rougeL: float


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: float


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: list[str], references: list[list[str]], max_n: int = 4) -> float:
    """Sentence BLEU: geometric mean of clipped n-gram precisions times BP.

    Candidate n-gram counts are clipped against the maximum count over all
    references. A zero clipped count on orders above 1 is smoothed add-one;
    order 1 is never smoothed. The brevity penalty uses the shortest
    reference length, so adding a reference can never lower the score.
    An empty candidate scores 0.
    """
    if not candidate or not references:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = _ngrams(candidate, n)
        total = max(len(candidate) - n + 1, 0)
        clipped = 0
        if cand_counts:
            best = Counter()
            for ref in references:
                for gram, count in _ngrams(ref, n).items():
                    if count > best[gram]:
                        best[gram] = count
            clipped = sum(min(count, best[gram]) for gram, count in cand_counts.items())
        if n == 1:
            if clipped == 0:
                return 0.0
            precision = clipped / total
        elif clipped == 0:
            precision = 1.0 / (total + 1)
        else:
            precision = clipped / total
        log_sum += math.log(precision)
    geo = math.exp(log_sum / max_n)
    c = len(candidate)
    r = min(len(ref) for ref in references)
    penalty = 1.0 if c >= r else math.exp(1.0 - r / c)
    return geo * penalty


def rouge_n(candidate: list[str], reference: list[str], n: int) -> dict:
    """N-gram overlap with multiset clipping; empty sides score 0."""
    cand_counts = _ngrams(candidate, n)
    ref_counts = _ngrams(reference, n)
    overlap = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    total_cand = sum(cand_counts.values())
    total_ref = sum(ref_counts.values())
    precision = overlap / total_cand if total_cand else 0.0
    recall = overlap / total_ref if total_ref else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        append = curr.append
        for j, y in enumerate(b, 1):
            if x == y:
                append(prev[j - 1] + 1)
            elif prev[j] >= curr[j - 1]:
                append(prev[j])
            else:
                append(curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: list[str], reference: list[str]) -> dict:
    """Longest-common-subsequence precision/recall/F1."""
    lcs = _lcs_length(candidate, reference)
    precision = lcs / len(candidate) if candidate else 0.0
    recall = lcs / len(reference) if reference else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz method."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-16:
            break
    return h


def _betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def ttest_independent(sample_a: list[float], sample_b: list[float]) -> TTestResult:
    """Welch's two-tailed t-test for independent samples.

    Degrees of freedom follow Welch-Satterthwaite; when both samples have
    zero variance the df falls back to na + nb - 2, with p = 1 for equal
    means and p = 0 otherwise. Raises ValidationError for samples smaller
    than 2.
    """
    na, nb = len(sample_a), len(sample_b)
    if na < 2 or nb < 2:
        raise ValidationError(f"need at least 2 observations per sample, got {na} and {nb}")
    mean_a = sum(sample_a) / na
    mean_b = sum(sample_b) / nb
    var_a = sum((x - mean_a) ** 2 for x in sample_a) / (na - 1)
    var_b = sum((x - mean_b) ** 2 for x in sample_b) / (nb - 1)
    sq = var_a / na + var_b / nb
    if sq == 0.0:
        df = float(na + nb - 2)
        if mean_a == mean_b:
            return TTestResult(0.0, 1.0, df)
        t = math.inf if mean_a > mean_b else -math.inf
        return TTestResult(t, 0.0, df)
    t = (mean_a - mean_b) / math.sqrt(sq)
    df = sq * sq / (
        (var_a / na) ** 2 / (na - 1) + (var_b / nb) ** 2 / (nb - 1)
    )
    p = _betainc_reg(df / 2.0, 0.5, df / (df + t * t))
    return TTestResult(t, min(max(p, 0.0), 1.0), df)


def score_pair(candidate: str, reference: str, qid: str = "") -> MetricRow:
    """All four metrics for one generated answer against its gold answer."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    return MetricRow(
        qid=qid,
        bleu=bleu(cand, [ref]),
        rouge1=rouge_n(cand, ref, 1)["f1"],
        rouge2=rouge_n(cand, ref, 2)["f1"],
        rougeL=rouge_l(cand, ref)["f1"],
    )


def score_answers(
    answers: dict[str, str], references: dict[str, str]
) -> tuple[list[MetricRow], dict]:
    """Score every qid present in both maps; aggregate by arithmetic mean.

    Ids missing from one side are reported at warning level. An empty
    intersection is an error naming both set sizes.
    """
    shared = [qid for qid in answers if qid in references]
    if not shared:
        raise ValidationError(
            f"no shared question ids: {len(answers)} generated vs {len(references)} reference"
        )
    missing = (set(answers) | set(references)) - set(shared)
    if missing:
        log.warning("%d question id(s) present on only one side were skipped", len(missing))
    rows = [score_pair(answers[qid], references[qid], qid=qid) for qid in shared]
    n = len(rows)
    aggregate = {
        "bleu": sum(r.bleu for r in rows) / n,
        "rouge1": sum(r.rouge1 for r in rows) / n,
        "rouge2": sum(r.rouge2 for r in rows) / n,
        "rougeL": sum(r.rougeL for r in rows) / n,
    }
    return rows, aggregate


def answers_from_records(records: list[QARecord]) -> dict[str, str]:
    """Reference answers keyed by question id; a duplicate id keeps the last."""
    refs: dict[str, str] = {}
    for record in records:
        if record.pubid in refs:
            log.warning("duplicate question id %s, keeping the last", record.pubid)
        refs[record.pubid] = record.long_answer
    return refs


def save_answers(answers: dict[str, str], path: str) -> None:
    write_jsonl(path, ({"qid": qid, "answer": text} for qid, text in answers.items()))


def load_answers(path: str) -> dict[str, str]:
    answers: dict[str, str] = {}
    for lineno, raw in read_jsonl(path):
        qid = raw.get("qid")
        answer = raw.get("answer")
        if not (isinstance(qid, str) and qid != ""):
            raise ValidationError(f"record {lineno}: missing or empty field 'qid'")
        if not isinstance(answer, str):
            raise ValidationError(f"record {lineno}: field 'answer' must be a string")
        if qid in answers:
            log.warning("duplicate answer for qid %s, keeping the last", qid)
        answers[qid] = answer
    return answers


def report_dict(rows: list[MetricRow], aggregate: dict) -> dict:
    return {
        "per_query": [
            {
                "qid": r.qid,
                "bleu": r.bleu,
                "rouge1": r.rouge1,
                "rouge2": r.rouge2,
                "rougeL": r.rougeL,
            }
            for r in rows
        ],
        "aggregate": {key: aggregate[key] for key in ("bleu", "rouge1", "rouge2", "rougeL")},
    }
