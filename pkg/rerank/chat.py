"""Chat-completion message types and the wire body they serialize to."""
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

ROLES = ('system', 'user', 'assistant')


def estimate_tokens(text: str) -> int:
    """Rough token count, ceil(chars / 4). Good enough for truncation budgets."""
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.role in ('system', 'user') and not self.content:
            raise ValueError(f"{self.role} message content must be non-empty")

    def as_dict(self):
        return {'role': self.role, 'content': self.content}


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: Tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_tokens: int = 64
    # routing metadata for local backends; never sent on the wire
    query_id: Optional[str] = field(default=None, compare=False)
    doc_ids: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'messages', tuple(self.messages))
        object.__setattr__(self, 'doc_ids', tuple(self.doc_ids))
        if not self.messages:
            raise ValueError("a chat request needs at least one message")
        if self.messages[0].role not in ('system', 'user'):
            raise ValueError("the first message must come from system or user")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")

    def body(self) -> dict:
        temperature = self.temperature
        if float(temperature).is_integer():
            temperature = int(temperature)
        return {
            'model': self.model,
            'messages': [message.as_dict() for message in self.messages],
            'temperature': temperature,
            'max_tokens': self.max_tokens,
        }

    def serialize(self) -> bytes:
        return json.dumps(self.body(), separators=(',', ':'), ensure_ascii=False).encode('utf-8')

    @property
    def user_content(self) -> str:
        return '\n'.join(m.content for m in self.messages if m.role == 'user')


@dataclass(frozen=True)
class ChatResponse:
    content: str
    prompt_tokens: int = 0
    completion_tokens: int = 0

    def __post_init__(self):
        if self.prompt_tokens < 0 or self.completion_tokens < 0:
            raise ValueError("token counts must be >= 0")
