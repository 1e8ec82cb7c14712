import yaml
from pathlib import Path
from typing import Dict, List, Tuple, Union

from phr_harness.matrix import MatrixCell, MatrixReport


class MatrixEvaluator:
    def __init__(self, ground_truth_path: Union[str, Path], report: Union[MatrixReport, str, Path]):
        self.ground_truth = self.load_yaml(ground_truth_path)
        if isinstance(report, MatrixReport):
            self.report = report
        else:
            self.report = MatrixReport.from_json(Path(report).read_text(encoding="utf-8"))

    def load_yaml(self, path: Union[str, Path]):
        with open(path, 'r') as f:
            return yaml.safe_load(f)

    def expected(self, section: str = "matrix") -> Dict[Tuple[str, str], dict]:
        """{(document, mode): {verdict, stage}} for one ground-truth section."""
        cells = {}
        for document, modes in (self.ground_truth.get(section) or {}).items():
            for mode, outcome in modes.items():
                cells[(document, mode)] = outcome
        return cells

    def _produced(self, section: str) -> Dict[Tuple[str, str], MatrixCell]:
        cells: List[MatrixCell] = self.report.probes if section == "probes" else self.report.cells
        return {(cell.document, cell.mode): cell for cell in cells}

    def accuracy(self, section: str = "matrix") -> Tuple[str, float]:
        expected = self.expected(section)
        produced = self._produced(section)

        total = len(expected)
        correct = 0
        messages = []

        for (document, mode), outcome in expected.items():
            cell = produced.get((document, mode))
            if cell is None:
                messages.append(f"Missing cell '{document}' / {mode}")
                continue
            if cell.verdict != outcome.get("verdict"):
                messages.append(f"'{document}' / {mode}: expected {outcome.get('verdict')}, got {cell.verdict}"
                                + (f" at {cell.stage}" if cell.stage else ""))
            elif cell.verdict == "rejected" and cell.stage != outcome.get("stage"):
                messages.append(f"'{document}' / {mode}: expected rejection at {outcome.get('stage')}, got {cell.stage}")
            else:
                correct += 1

        acc = correct / total if total else 0

        if not messages:
            result_msg = "All cells match."
        else:
            result_msg = "\n".join(messages)

        return result_msg, acc

    def coverage(self, section: str = "matrix") -> Tuple[str, float]:
        expected = self.expected(section)
        produced = self._produced(section)

        total = len(expected)
        present = sum(1 for key in expected if key in produced)
        unexpected = [f"Unexpected cell '{d}' / {m}" for d, m in produced if (d, m) not in expected]

        cov = present / total if total else 0
        return ("\n".join(unexpected) if unexpected else "No unexpected cells."), cov

    @property
    def deviations(self) -> int:
        return sum(
            round((1 - self.accuracy(section)[1]) * len(self.expected(section)))
            for section in ("matrix", "probes")
        )

    @staticmethod
    def help():
        print("""
MatrixEvaluator - Compare an attack matrix against the expected matrix

Constructor:
- MatrixEvaluator(ground_truth_path, report)   # report: MatrixReport or path to its JSON

Methods:
- accuracy(section="matrix") -> str, float
    Share of (document, mode) cells whose verdict and failing stage match.

- coverage(section="matrix") -> str, float
    Share of expected cells present in the report, listing unexpected ones.

Sections: "matrix" (benign + PHR attacks) and "probes".

Usage:
>>> evaluator = MatrixEvaluator('ground_truth/phr_matrix.yaml', 'output/matrix.json')
>>> msg, acc = evaluator.accuracy()
>>> print(msg)
>>> print(f"Accuracy: {acc:.2%}")
        """)
