from structure_guard.errors import ProfileParseError, StructureGuardError, UnknownProfile
from structure_guard.rules import ChildAllowance, StructureRule, StructureRuleSet, Violation
from structure_guard.validator import validate_structure
from structure_guard.instructions import InstructionKind, ValidationInstruction, apply_instructions
from structure_guard.profile import Profile, load_profile, parse_profile, save_profile

__all__ = [
    "ProfileParseError",
    "StructureGuardError",
    "UnknownProfile",
    "ChildAllowance",
    "StructureRule",
    "StructureRuleSet",
    "Violation",
    "validate_structure",
    "InstructionKind",
    "ValidationInstruction",
    "apply_instructions",
    "Profile",
    "load_profile",
    "parse_profile",
    "save_profile",
]
