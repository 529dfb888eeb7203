"""Thin HTTP client for the service.

Without a server URL the client mounts the FastAPI app on an in-process
ASGI transport, so the CLI works standalone while speaking the exact wire
format a remote deployment would.
"""

from __future__ import annotations

import asyncio

import httpx

from .schemas import (DemoRequest, DemoResponse, RolloutRequest,
                      RolloutResponse, TrainRequest, TrainResponse)


class ServiceError(RuntimeError):
    def __init__(self, kind: str, message: str, step: int | None = None):
        super().__init__(message)
        self.kind = kind
        self.step = step


class _InProcessTransport(httpx.BaseTransport):
    """Sync bridge to the async-only ASGI transport."""

    def __init__(self, app):
        self._transport = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        content = request.read()
        rebuilt = httpx.Request(request.method, request.url,
                                headers=request.headers, content=content)

        async def _run():
            response = await self._transport.handle_async_request(rebuilt)
            body = await response.aread()
            await response.aclose()
            return httpx.Response(response.status_code,
                                  headers=response.headers, content=body)

        return asyncio.run(_run())


class ServiceClient:
    def __init__(self, base_url: str | None = None, timeout: float = 600.0):
        if base_url is None:
            from .service import app
            self._client = httpx.Client(
                transport=_InProcessTransport(app),
                base_url="http://nhdmp.local", timeout=timeout)
        else:
            self._client = httpx.Client(base_url=base_url, timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _post(self, path: str, payload) -> dict:
        response = self._client.post(path, json=payload.model_dump())
        if response.status_code >= 400:
            raise self._to_error(response)
        return response.json()

    @staticmethod
    def _to_error(response: httpx.Response) -> ServiceError:
        try:
            detail = response.json().get("detail")
        except ValueError:
            detail = None
        if isinstance(detail, dict) and "kind" in detail:
            return ServiceError(detail["kind"], detail.get("message", ""),
                                detail.get("step"))
        return ServiceError("validation", f"service error {response.status_code}: "
                                          f"{response.text[:500]}")

    def gen_demo(self, req: DemoRequest) -> DemoResponse:
        return DemoResponse.model_validate(self._post("/demo", req))

    def train(self, req: TrainRequest) -> TrainResponse:
        return TrainResponse.model_validate(self._post("/train", req))

    def rollout(self, req: RolloutRequest) -> RolloutResponse:
        return RolloutResponse.model_validate(self._post("/rollout", req))
