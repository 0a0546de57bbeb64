"""Static trust registry shared by all roles.

Hub accreditation is modeled as a signed file listing hub URLs and their
verification keys, alongside pinned issuer keys. An authority key signs the
registry body; roles verify it at load when they hold the authority's public
key, and accept unsigned registries otherwise (dev mode).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Optional

from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey

from . import crypto
from .errors import BadSignature, NotFound

REGISTRY_SIGN_CTX = "d2:trust_registry"


@dataclass
class TrustRegistry:
    """Pinned keys: hub URL -> signing key; issuer URL -> {sign, kx} keys."""

    hubs: Dict[str, str] = field(default_factory=dict)
    issuers: Dict[str, Dict[str, str]] = field(default_factory=dict)
    signature: str = ""

    def body(self) -> dict:
        return {
            "hubs": {u: k for u, k in sorted(self.hubs.items())},
            "issuers": {u: dict(sorted(v.items())) for u, v in sorted(self.issuers.items())},
        }

    def to_dict(self) -> dict:
        d = self.body()
        d["signature"] = self.signature
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrustRegistry":
        return cls(
            hubs=dict(d.get("hubs", {})),
            issuers={u: dict(v) for u, v in d.get("issuers", {}).items()},
            signature=d.get("signature", ""),
        )

    def sign(self, authority_key: Ed25519PrivateKey) -> None:
        self.signature = crypto.sign_payload(authority_key, REGISTRY_SIGN_CTX, self.body())

    def verify(self, authority_pub_b64: str) -> None:
        crypto.verify_payload(authority_pub_b64, REGISTRY_SIGN_CTX, self.body(), self.signature)

    def hub_key(self, hub_url: str) -> str:
        try:
            return self.hubs[hub_url]
        except KeyError:
            raise NotFound(f"hub not in trust registry: {hub_url}") from None

    def issuer_sign_key(self, issuer_url: str) -> str:
        try:
            return self.issuers[issuer_url]["sign"]
        except KeyError:
            raise NotFound(f"issuer not in trust registry: {issuer_url}") from None

    def issuer_kx_key(self, issuer_url: str) -> str:
        try:
            return self.issuers[issuer_url]["kx"]
        except KeyError:
            raise NotFound(f"issuer not in trust registry: {issuer_url}") from None

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path, authority_pub_b64: Optional[str] = None) -> "TrustRegistry":
        with open(path, encoding="utf-8") as fh:
            registry = cls.from_dict(json.load(fh))
        if authority_pub_b64:
            registry.verify(authority_pub_b64)
        return registry
