import json
from pathlib import Path
from typing import Any, Dict, Union


class JSONGenerator:
    """JSON rendering of verification, audit and matrix reports."""

    def __init__(self, indent: int = 2):
        self.indent = indent

    def generate(self, data: Dict[str, Any]) -> str:
        return json.dumps(data, indent=self.indent, ensure_ascii=False)

    def save(self, data: Dict[str, Any], output_path: Union[str, Path]) -> Path:
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(self.generate(data) + "\n", encoding="utf-8")
        return output_path
