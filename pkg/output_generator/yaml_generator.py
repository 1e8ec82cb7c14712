from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from config.constants import DEFAULT_MANIFEST_TEMPLATE


class YAMLGeneratorError(Exception):
    """Base exception for YAML generator errors."""
    pass


class YAMLGenerator:
    """Generator for the attack manifest and matrix summaries, laid out by a template."""

    def __init__(self, template_path: Union[str, Path] = DEFAULT_MANIFEST_TEMPLATE):
        self.template = self._load_template(Path(template_path))

    def _load_template(self, template_path: Path) -> Dict[str, Any]:
        """Load and parse the YAML template."""
        try:
            with open(template_path, 'r', encoding='utf-8') as f:
                template = yaml.safe_load(f)
                if not template:
                    raise YAMLGeneratorError("Template file is empty")
                if "template" not in template:
                    raise YAMLGeneratorError("Template has no 'template' section")
                return template
        except yaml.YAMLError as e:
            raise YAMLGeneratorError(f"Invalid YAML in template: {e}")
        except OSError as e:
            raise YAMLGeneratorError(f"Error loading template: {e}")

    def _ordered(self, section: str, content: Dict[str, Any]) -> Dict[str, Any]:
        layout = self.template["template"].get(section) or {}
        missing = [key for key in (self.template.get("required") or {}).get(section, []) if key not in content]
        if missing:
            raise YAMLGeneratorError(f"{section} entry is missing {', '.join(missing)}")
        ordered = {key: content[key] for key in layout if key in content}
        ordered.update({key: value for key, value in content.items() if key not in ordered})
        return ordered

    def generate(self, content: Dict[str, Any]) -> str:
        """
        Render a manifest.

        Args:
            content: manifest mapping with an ``attacks`` list

        Returns:
            Formatted YAML string
        """
        attacks: List[Dict[str, Any]] = [self._ordered("attack", entry) for entry in content.get("attacks", [])]
        manifest = self._ordered("manifest", {**content, "attacks": attacks})
        return self.dump(manifest)

    @staticmethod
    def dump(content: Any) -> str:
        return yaml.safe_dump(
            content,
            default_flow_style=False,
            sort_keys=False,
            allow_unicode=True,
            width=1000
        )

    def save(self, content: Dict[str, Any], output_path: Union[str, Path], raw: bool = False) -> Path:
        """
        Generate and write YAML to ``output_path``.

        Raises:
            YAMLGeneratorError: If file cannot be written
        """
        text = self.dump(content) if raw else self.generate(content)
        output_path = Path(output_path)
        try:
            output_path.parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, 'w', encoding='utf-8') as f:
                f.write(text)
            return output_path
        except OSError as e:
            raise YAMLGeneratorError(f"Error writing YAML file: {e}")


def load_yaml(path: Union[str, Path]) -> Optional[Any]:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise YAMLGeneratorError(f"Cannot read {path}: {e}")
