"""Shared error base class.

Every package error carries a stable machine-readable ``code`` so the CLI
can map failures to exit codes and emit JSON diagnostics without parsing
message text.
"""


class McmsError(Exception):
    code = "Error"

    def __init__(self, detail: str = ""):
        super().__init__(detail)
        self.detail = detail

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}" if self.detail else self.code
