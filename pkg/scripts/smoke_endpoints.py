#!/usr/bin/env python3
"""
Smoke run of every lambdaq endpoint against a running service.

Payloads come from the bundled reproduction scenarios.

    PYTHONPATH=. python scripts/smoke_endpoints.py [base_url]
"""
import json
import os
import sys
from typing import Any, Dict, List, Tuple

import httpx

from lambdaq.core.config import settings
from lambdaq.services.reproduce import load_scenario

SERVICE_URL = os.getenv("LAMBDAQ_URL", "http://localhost:8003")


def _config(scenario: str, run: str) -> Dict[str, Any]:
    return next(r.config for r in load_scenario(scenario).runs if r.name == run)


def smoke_requests() -> List[Tuple[str, str, Dict[str, Any]]]:
    """(title, path, payload) for each POST endpoint."""
    api = settings.API_V1_STR
    return [
        ("Quantile", f"{api}/quantile", _config("example1", "quantile")),
        ("Empirical", f"{api}/empirical", {"samples": list(range(1, 11)), "lambda": {"kind": "constant", "level": 0.25}}),
        ("Isolate", f"{api}/isolate", _config("interval", "cells8")),
        ("Optimize", f"{api}/optimize", _config("two_asset", "penalty")),
    ]


def print_response(response: httpx.Response, title: str) -> None:
    print(f"\n=== {title} ===")
    print(f"Status Code: {response.status_code}")
    try:
        print(json.dumps(response.json(), indent=2))
    except ValueError:
        print(f"Raw response text: {response.text}")
    print("=" * 50)


def run_smoke(client: httpx.Client, verbose: bool = True) -> Dict[str, int]:
    """Hit /health and every POST endpoint; returns status codes by title."""
    statuses = {}
    response = client.get("/health")
    statuses["Health"] = response.status_code
    if verbose:
        print_response(response, "Health Check")
    for title, path, payload in smoke_requests():
        response = client.post(path, json=payload)
        statuses[title] = response.status_code
        if verbose:
            print_response(response, title)
    return statuses


def main() -> int:
    base_url = sys.argv[1] if len(sys.argv) > 1 else SERVICE_URL
    with httpx.Client(base_url=base_url, timeout=120.0) as client:
        try:
            statuses = run_smoke(client)
        except httpx.HTTPError as e:
            print(f"ERROR: {str(e)}")
            return 1
    failed = [title for title, status in statuses.items() if status >= 300]
    print(f"\n{len(statuses) - len(failed)} of {len(statuses)} endpoints OK")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
