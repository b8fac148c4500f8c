"""
Validation reports shared by the complex, affine and cycle validators.

Validators collect every problem they find instead of stopping at the first,
then either hand the report to the caller or raise the first error.
"""

from typing import Callable, Dict, List, Optional

from .errors import TropicalError


class ValidationReport:
    def __init__(self, module: str):
        self.module = module
        self.errors: List[Dict] = []
        self.warnings: List[Dict] = []
        self.info: List[Dict] = []

    def add_error(self, kind: str, subject: str, message: str):
        self.errors.append({"kind": kind, "subject": subject, "message": message})

    def add_warning(self, kind: str, subject: str, message: str):
        self.warnings.append({"kind": kind, "subject": subject, "message": message})

    def add_info(self, kind: str, subject: str, message: str):
        self.info.append({"kind": kind, "subject": subject, "message": message})

    def merge(self, other: "ValidationReport"):
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)
        self.info.extend(other.info)

    @property
    def is_valid(self) -> bool:
        return len(self.errors) == 0

    def kinds(self) -> List[str]:
        return [e["kind"] for e in self.errors]

    def raise_first(self, error_type: Callable[..., TropicalError]):
        """Raise the first collected error as ``error_type(kind, message)``."""
        if self.errors:
            first = self.errors[0]
            raise error_type(first["kind"], f"{first['subject']}: {first['message']}")

    def to_dict(self) -> Dict:
        return {
            "module": self.module,
            "valid": self.is_valid,
            "errors": self.errors,
            "warnings": self.warnings,
            "info": self.info,
        }

    def print_report(self, title: Optional[str] = None):
        if title:
            print(f"\n{title}")

        if self.errors:
            print(f"\n❌ ERRORS ({len(self.errors)}):")
            for e in self.errors:
                print(f"  {self.module}: {e['kind']}: {e['subject']}: {e['message']}")

        if self.warnings:
            print(f"\n⚠️  WARNINGS ({len(self.warnings)}):")
            for w in self.warnings:
                print(f"  {self.module}: {w['kind']}: {w['subject']}: {w['message']}")

        if self.info:
            print(f"\nℹ️  INFO ({len(self.info)}):")
            for i in self.info:
                print(f"  {i['subject']}: {i['message']}")

        if self.is_valid and not self.warnings:
            print("\n✅ All validations passed!")
        elif self.is_valid:
            print(f"\n✅ Valid with {len(self.warnings)} warning(s)")
        else:
            print(f"\n❌ Validation failed with {len(self.errors)} error(s)")
