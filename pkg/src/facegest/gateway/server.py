"""Streaming endpoints: newline-delimited JSON over TCP, with an optional
WebSocket framing of the same protocol for browser clients.

One session per connection; messages are processed strictly in arrival
order and responses are written back in order.
"""

from __future__ import annotations

import asyncio
import logging

from .session import Session, encode_message

log = logging.getLogger("facegest.server")

# Base64 frames are large; one 320x240 RGB frame is ~0.3 MB of JSON.
READ_LIMIT = 16 * 1024 * 1024


async def _handle_connection(
    reader: asyncio.StreamReader,
    writer: asyncio.StreamWriter,
    default_config: dict | None = None,
) -> None:
    peer = writer.get_extra_info("peername")
    log.info("connection from %s", peer)
    session = Session(default_config=default_config)
    try:
        while not session.ended:
            line = await reader.readline()
            if not line:
                break
            text = line.decode("utf-8", errors="replace").strip()
            if not text:
                continue
            for resp in session.handle_line(text):
                writer.write((encode_message(resp) + "\n").encode("utf-8"))
            await writer.drain()
    except (ConnectionResetError, asyncio.IncompleteReadError):
        pass
    finally:
        writer.close()
        try:
            await writer.wait_closed()
        except ConnectionResetError:
            pass
        log.info("connection closed: %s", peer)


async def start_tcp_server(
    host: str, port: int, default_config: dict | None = None
) -> asyncio.base_events.Server:
    async def handle(reader, writer):
        await _handle_connection(reader, writer, default_config)

    server = await asyncio.start_server(handle, host, port, limit=READ_LIMIT)
    addr = server.sockets[0].getsockname()
    print(f"LISTENING {addr[0]}:{addr[1]}", flush=True)
    log.info("tcp server listening on %s:%s", addr[0], addr[1])
    return server


async def serve_forever(
    host: str, port: int, use_websocket: bool = False, default_config: dict | None = None
) -> None:
    if use_websocket:
        await _serve_ws_forever(host, port, default_config)
        return
    server = await start_tcp_server(host, port, default_config)
    async with server:
        await server.serve_forever()


async def _serve_ws_forever(host: str, port: int, default_config: dict | None = None) -> None:
    try:
        import websockets
    except ImportError as exc:  # pragma: no cover - environment-dependent
        raise RuntimeError(
            "WebSocket mode needs the 'websockets' package (pip install facegest[ws])"
        ) from exc

    async def handler(ws):
        session = Session(default_config=default_config)
        async for message in ws:
            if isinstance(message, bytes):
                message = message.decode("utf-8", errors="replace")
            for piece in message.split("\n"):
                piece = piece.strip()
                if not piece:
                    continue
                for resp in session.handle_line(piece):
                    await ws.send(encode_message(resp))
            if session.ended:
                break

    async with websockets.serve(handler, host, port, max_size=READ_LIMIT):
        print(f"LISTENING {host}:{port}", flush=True)
        log.info("websocket server listening on %s:%s", host, port)
        await asyncio.Future()
