from .json_generator import JSONGenerator
from .yaml_generator import YAMLGenerator, YAMLGeneratorError, load_yaml

__all__ = ["JSONGenerator", "YAMLGenerator", "YAMLGeneratorError", "load_yaml"]
