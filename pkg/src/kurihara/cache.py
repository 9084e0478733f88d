"""Versioned content-addressed JSON cache.

Keys are SHA-256 hashes of a canonical JSON encoding of the inputs; entries
are written atomically (temp file + rename) so concurrent readers never see a
torn file.  Breaking schema changes bump SCHEMA_VERSION, which participates in
every key, invalidating old entries wholesale.
"""

import hashlib
import json
import os
import tempfile

SCHEMA_VERSION = 1


def cache_key(kind, payload):
    body = json.dumps(
        {"schema": SCHEMA_VERSION, "kind": kind, "payload": payload},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(body.encode()).hexdigest()


class JsonCache:
    def __init__(self, directory):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)

    def _path(self, key):
        return os.path.join(self.directory, f"{key}.json")

    def get(self, key):
        path = self._path(key)
        try:
            with open(path) as f:
                entry = json.load(f)
        except (OSError, json.JSONDecodeError):
            return None
        if entry.get("schema") != SCHEMA_VERSION:
            return None
        return entry["value"]

    def put(self, key, value):
        entry = {"schema": SCHEMA_VERSION, "key": key, "value": value}
        body = json.dumps(entry, sort_keys=True, separators=(",", ":"))
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as f:
                f.write(body)
            os.replace(tmp, self._path(key))
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return key


def eigensymbol_key(E, calibrated=True):
    return cache_key(
        "eigensymbol",
        {
            "ainvs": list(E.ainvs()),
            "conductor": E.conductor,
            "sign": 1,
            "calibrated": calibrated,
        },
    )
