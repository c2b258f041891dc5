"""Pluggable report delivery.

The rendered report file is the run's durable artifact; delivery is a
best-effort last hop. Sinks take a path to an existing report file and
return a JSON-serializable receipt describing where the copy went.
"""

from __future__ import annotations

import re
import shutil
import smtplib
from abc import ABC, abstractmethod
from email.message import EmailMessage
from pathlib import Path
from typing import Any, Callable, Optional

from diligence.errors import DeliveryError


def _recipient_slug(recipient: str) -> str:
    """A filesystem-safe directory name for a recipient address."""
    slug = re.sub(r"[^A-Za-z0-9@._+-]+", "_", recipient.strip())
    slug = slug.strip("._")
    if not slug:
        raise DeliveryError(f"recipient {recipient!r} yields no usable directory name")
    return slug


class DeliverySink(ABC):
    """Destination for a finished report."""

    @abstractmethod
    def identity(self) -> str:
        """Stable name for receipts and traces."""

    @abstractmethod
    def deliver(self, report_path: Path, recipient: str, run_id: str) -> dict[str, Any]:
        """Send the report file to the recipient; return a receipt.

        Raises DeliveryError when the report file is missing or the sink's
        transport fails.
        """


def _require_report(report_path: Path) -> Path:
    path = Path(report_path)
    if not path.is_file():
        raise DeliveryError(f"report file does not exist: {path}")
    return path


class FileDropSink(DeliverySink):
    """Default sink: copy the report into ``<root>/<recipient>/<run_id>.html``."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    def identity(self) -> str:
        return f"file-drop:{self.root}"

    def deliver(self, report_path: Path, recipient: str, run_id: str) -> dict[str, Any]:
        source = _require_report(report_path)
        target = self.root / _recipient_slug(recipient) / f"{run_id}.html"
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(source, target)
        except OSError as exc:
            raise DeliveryError(f"file-drop delivery failed: {exc}") from exc
        return {
            "sink": "file-drop",
            "delivered": True,
            "recipient": recipient,
            "path": str(target),
        }


class SmtpSink(DeliverySink):
    """SMTP-style adapter: the report travels as an HTML email body.

    The transport is injectable so deployments can swap in an API-backed
    mailer (or tests a recorder) without touching the message assembly;
    by default messages go out over ``smtplib.SMTP``.
    """

    def __init__(
        self,
        host: str,
        port: int = 25,
        sender: str = "diligence@localhost",
        transport: Optional[Callable[[EmailMessage], None]] = None,
    ):
        self.host = host
        self.port = port
        self.sender = sender
        self._transport = transport

    def identity(self) -> str:
        return f"smtp:{self.host}:{self.port}"

    def _send(self, message: EmailMessage) -> None:
        if self._transport is not None:
            self._transport(message)
            return
        with smtplib.SMTP(self.host, self.port) as conn:
            conn.send_message(message)

    def deliver(self, report_path: Path, recipient: str, run_id: str) -> dict[str, Any]:
        source = _require_report(report_path)
        message = EmailMessage()
        message["From"] = self.sender
        message["To"] = recipient
        message["Subject"] = f"Due-diligence report {run_id}"
        message.set_content("An HTML-capable mail client is required to read this report.")
        message.add_alternative(source.read_text(encoding="utf-8"), subtype="html")
        try:
            self._send(message)
        except DeliveryError:
            raise
        except Exception as exc:
            raise DeliveryError(f"smtp delivery failed: {exc}") from exc
        return {
            "sink": "smtp",
            "delivered": True,
            "recipient": recipient,
            "host": self.host,
        }
