"""Driving the HTTP API
=======================

Starts the service on a local port with an empty manifest, manages the
watchlists over HTTP and tails the server-sent event stream.
"""

import json
import tempfile
import threading
import time
from pathlib import Path

import httpx
import uvicorn

from roadwatch import PipelineConfig
from roadwatch.service import PipelineService, create_app

root = Path(tempfile.mkdtemp(prefix="roadwatch-api-demo-"))
(root / "manifest.jsonl").write_text(
    json.dumps({"frame_id": "f0", "camera_id": "cam1", "timestamp_ms": 0,
                "image_path": "frames/f0.jpg"}) + "\n"
)
(root / "fixture.jsonl").write_text(
    json.dumps({"frame_id": "f0", "kind": "plate", "bbox": [0, 0, 100, 50],
                "confidence": 0.9, "raw_text": "KA01F555",
                "text_confidence": 0.9}) + "\n"
)

config = PipelineConfig(
    manifest_path=str(root / "manifest.jsonl"),
    fixture_path=str(root / "fixture.jsonl"),
    event_log_path=str(root / "events.log"),
    api_port=8787,
).validate()

service = PipelineService(config)
server = uvicorn.Server(uvicorn.Config(create_app(service), host="127.0.0.1",
                                       port=config.api_port, log_level="warning"))
threading.Thread(target=server.run, daemon=True).start()
while not server.started:
    time.sleep(0.01)

base = f"http://127.0.0.1:{config.api_port}"
print("health:", httpx.get(base + "/api/health").json())

created = httpx.post(base + "/api/watchlist/plates",
                     json={"plate": "ka 01 f 555", "label": "stolen"}).json()
print("watchlisted plate:", created)

print("advance:", httpx.post(base + "/api/pipeline/advance", json={"frames": 10}).json())
print("alerts:", httpx.get(base + "/api/alerts").json())

print("\nevent stream replay:")
with httpx.stream("GET", base + "/api/events/stream", timeout=5) as stream:
    count = 0
    for line in stream.iter_lines():
        if line.startswith("data: "):
            print(" ", line[len("data: "):])
            count += 1
            if count >= len(service.records):
                break

server.should_exit = True
service.close()
