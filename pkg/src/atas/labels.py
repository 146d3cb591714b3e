from __future__ import annotations

import enum


class Label(str, enum.Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"

    def __str__(self) -> str:
        return self.value
