"""An in-process chat server with a scripted partner, spoken over real sockets.

Starts the server on an ephemeral port, connects a client, exchanges
messages with the "Peter" bot, then restarts the server and shows that the
conversation log brings the history back.

Run:  python3 demos/03_server_and_bots.py
"""

import asyncio
import json
import tempfile

from hudchat.bots import BotRule, BotScript
from hudchat.server import ChatServer, Router, recover
from hudchat.wire import WireFrame, decode_frame, encode_frame

PETER = BotScript(
    name="Peter",
    rules=(
        BotRule(trigger="where", reply_bodies=("At the cafe",), delay_ms=120),
        BotRule(trigger="any", reply_bodies=("ok, see you",), delay_ms=80),
    ),
    rng_seed=42,
)


async def send(writer, frame):
    writer.write(encode_frame(frame))
    await writer.drain()


async def recv(reader):
    return decode_frame(await reader.readline())


async def main():
    with tempfile.TemporaryDirectory() as tmp:
        log_path = f"{tmp}/conversations.jsonl"

        server = ChatServer(Router(bots=[PETER], log_path=log_path),
                            host="127.0.0.1", port=0, ws_port=None)
        await server.start()
        print(f"server up on 127.0.0.1:{server.port}, bot: Peter\n")

        reader, writer = await asyncio.open_connection("127.0.0.1", server.port)
        await send(writer, WireFrame(type="hello", from_="self"))
        print("->", (await recv(reader)).type)

        for body in ("where are you", "ok see you at five"):
            await send(writer, WireFrame(type="msg", from_="self", to="Peter",
                                         body=body))
            ack = await recv(reader)
            print(f"sent {body!r}  (ack id={ack.id}, seq={ack.seq})")
            reply = await recv(reader)
            print(f"  Peter replies: {reply.body!r} (seq={reply.seq})")

        await send(writer, WireFrame(type="history_req", from_="self", to="Peter"))
        history = await recv(reader)
        print("\nserver-side history:")
        for m in json.loads(history.body):
            print(f"  #{m['seq']} {m['from']:>5} -> {m['to']:<5} {m['body']!r}")

        writer.close()
        await server.stop()

        print("\nserver stopped; recovering from the log...")
        recovered = recover(log_path)
        for key, msgs in recovered.histories.items():
            print(f"  conversation {'~'.join(key)}: {len(msgs)} message(s), "
                  f"next seq {recovered.next_seq[key]}")


asyncio.run(main())
