#!/usr/bin/env python3
"""Writes testdata/wire_vectors.json: valid packets with decoded fields, invalid ones with their error name."""
import argparse
import json
import math
import random
import struct
from pathlib import Path

MAGIC = b"FC"
VERSION = 1
KINDS = {"audio": 0, "video": 1, "control": 2, "server-audio": 3, "server-event": 4}
HEADER = struct.Struct(">2sBB16sIQI")
assert HEADER.size == 36


def packet(kind, sid, seq, ts, payload, *, magic=MAGIC, version=VERSION, length=None):
    kind_byte = KINDS[kind] if isinstance(kind, str) else kind
    n = len(payload) if length is None else length
    return HEADER.pack(magic, version, kind_byte, sid, seq, ts, n) + payload


def audio_payload(rate, samples):
    return struct.pack(">I", rate) + struct.pack("<%dh" % len(samples), *samples)


def sine(n, hz, rate, amp=0.3):
    return [int(round(amp * 32767 * math.sin(2 * math.pi * hz * i / rate))) for i in range(n)]


def jpeg(width, height, scan=b"\x00\x11\x22"):
    sof = struct.pack(">BHHB", 8, height, width, 1) + b"\x01\x11\x00"
    return (b"\xff\xd8" + b"\xff\xc0" + struct.pack(">H", len(sof) + 2) + sof
            + b"\xff\xda" + struct.pack(">H", 8) + b"\x01\x01\x00\x00\x3f\x00" + scan + b"\xff\xd9")


def control(obj):
    return json.dumps(obj, separators=(",", ":")).encode()


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "testdata" / "wire_vectors.json"))
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    def sid():
        return bytes(rng.randrange(256) for _ in range(16))

    valid = []

    def add_valid(name, kind, payload, seq=None, ts=None, session=None):
        s = session if session is not None else sid()
        q = rng.randrange(2**32) if seq is None else seq
        t = rng.randrange(2**40) if ts is None else ts
        valid.append({
            "name": name, "hex": packet(kind, s, q, t, payload).hex(), "kind": kind,
            "session_id": s.hex(), "seq": q, "timestamp_ms": t, "payload_hex": payload.hex(),
        })

    for n in (1, 2, 160, 320, 480, 743, 1024, 2048):
        add_valid(f"audio-16k-{n}", "audio", audio_payload(16000, sine(n, 440, 16000)))
    for n in (1, 441, 1024, 2048, 4096):
        add_valid(f"audio-44k-{n}", "audio", audio_payload(44100, sine(n, 440, 44100)))
    add_valid("audio-extremes", "audio", audio_payload(16000, [-32768, 32767, 0, -1, 1]))
    add_valid("audio-seq-zero", "audio", audio_payload(16000, [0] * 8), seq=0, ts=0)
    add_valid("audio-seq-max", "audio", audio_payload(16000, [5] * 8), seq=2**32 - 1, ts=2**64 - 1)
    add_valid("audio-zero-session", "audio", audio_payload(16000, [7] * 4), session=bytes(16))
    add_valid("audio-ff-session", "audio", audio_payload(44100, [7] * 4), session=b"\xff" * 16)
    for i in range(6):
        n = rng.randrange(1, 3000)
        rate = rng.choice((16000, 44100))
        add_valid(f"audio-random-{i}", "audio", audio_payload(rate, [rng.randrange(-32768, 32768) for _ in range(n)]))
    for n in (160, 2048):
        add_valid(f"server-audio-{n}", "server-audio", audio_payload(16000, sine(n, 220, 16000)))
    for w, h in ((320, 240), (640, 480), (1, 1), (1920, 1080)):
        add_valid(f"video-{w}x{h}", "video", jpeg(w, h))
    add_valid("video-soi-only-prefix", "video", b"\xff\xd8\xff\xe0\x00\x10JFIF\x00")
    add_valid("video-long-scan", "video", jpeg(64, 48, bytes(rng.randrange(256) for _ in range(500)).replace(b"\xff", b"\x00")))
    controls = [
        {"type": "hello"},
        {"type": "get_metrics"},
        {"type": "transcript_edit", "turn_id": 1, "text": "hello there"},
        {"type": "transcript_edit", "turn_id": 42, "text": "café ☃"},
        {"type": "ping", "n": 3},
        {"type": "x", "nested": {"a": [1, 2, 3], "b": None}},
        {"type": ""},
    ]
    for i, c in enumerate(controls):
        add_valid(f"control-{i}", "control", control(c))
    add_valid("control-pretty", "control", b'{\n  "type": "hello"\n}\n')
    events = [
        {"type": "turn", "turn_id": 1, "speaker": "user", "text": "hi", "emotion": "happy"},
        {"type": "turn", "turn_id": 2, "speaker": "system", "text": "hello"},
        {"type": "state", "state": "listening"},
        {"type": "emotion_update", "label": "sad", "confidence": 0.75, "timestamp_ms": 1200},
        {"type": "speaking_start", "turn_id": 2},
        {"type": "speaking_end", "turn_id": 2},
        {"type": "error", "stage": "chat", "code": "Timeout", "message": "x"},
    ]
    for i, e in enumerate(events):
        add_valid(f"server-event-{i}", "server-event", control(e))
    for i in range(8):
        kind = rng.choice(["audio", "control", "video"])
        if kind == "audio":
            payload = audio_payload(16000, [rng.randrange(-100, 100) for _ in range(rng.randrange(1, 50))])
        elif kind == "control":
            payload = control({"type": "t%d" % i, "v": rng.random()})
        else:
            payload = jpeg(rng.randrange(1, 4000), rng.randrange(1, 4000))
        add_valid(f"mixed-{i}", kind, payload)

    invalid = []

    def add_invalid(name, raw, error):
        invalid.append({"name": name, "hex": raw.hex(), "error": error})

    ok_audio = audio_payload(16000, [1, 2, 3, 4])
    s = sid()
    add_invalid("empty", b"", "TruncatedPayload")
    add_invalid("short-header", packet("audio", s, 1, 1, ok_audio)[:20], "TruncatedPayload")
    add_invalid("header-minus-one", packet("control", s, 1, 1, b"")[:35], "TruncatedPayload")
    add_invalid("bad-magic", packet("audio", s, 1, 1, ok_audio, magic=b"XX"), "BadMagic")
    add_invalid("bad-magic-lowercase", packet("audio", s, 1, 1, ok_audio, magic=b"fc"), "BadMagic")
    add_invalid("version-0", packet("audio", s, 1, 1, ok_audio, version=0), "UnsupportedVersion")
    add_invalid("version-2", packet("audio", s, 1, 1, ok_audio, version=2), "UnsupportedVersion")
    add_invalid("kind-5", packet(5, s, 1, 1, ok_audio), "UnknownKind")
    add_invalid("kind-255", packet(255, s, 1, 1, ok_audio), "UnknownKind")
    add_invalid("length-too-large", packet("control", s, 1, 1, b"{}", length=16 * 1024 * 1024 + 1), "PayloadTooLarge")
    add_invalid("length-max-u32", packet("control", s, 1, 1, b"{}", length=2**32 - 1), "PayloadTooLarge")
    add_invalid("truncated-payload", packet("audio", s, 1, 1, ok_audio, length=len(ok_audio) + 4), "TruncatedPayload")
    add_invalid("trailing-bytes", packet("audio", s, 1, 1, ok_audio, length=len(ok_audio) - 2), "LengthMismatch")
    add_invalid("two-packets", packet("control", s, 1, 1, b'{"type":"a"}') * 2, "LengthMismatch")
    add_invalid("audio-empty", packet("audio", s, 1, 1, b""), "EmptyAudioPayload")
    add_invalid("audio-rate-only", packet("audio", s, 1, 1, struct.pack(">I", 16000)), "EmptyAudioPayload")
    add_invalid("audio-short-rate", packet("audio", s, 1, 1, b"\x00\x00"), "EmptyAudioPayload")
    add_invalid("audio-odd-bytes", packet("audio", s, 1, 1, ok_audio + b"\x01"), "OddSampleBytes")
    add_invalid("audio-rate-48k", packet("audio", s, 1, 1, audio_payload(48000, [1, 2])), "UnsupportedRate")
    add_invalid("audio-rate-8k", packet("audio", s, 1, 1, audio_payload(8000, [1, 2])), "UnsupportedRate")
    add_invalid("audio-rate-le", packet("audio", s, 1, 1, struct.pack("<I", 16000) + b"\x00\x00"), "UnsupportedRate")
    add_invalid("server-audio-odd", packet("server-audio", s, 1, 1, ok_audio + b"\x00"), "OddSampleBytes")
    add_invalid("video-empty", packet("video", s, 1, 1, b""), "NotJpeg")
    add_invalid("video-png", packet("video", s, 1, 1, b"\x89PNG\r\n\x1a\n"), "NotJpeg")
    add_invalid("video-one-byte", packet("video", s, 1, 1, b"\xff"), "NotJpeg")
    add_invalid("control-empty", packet("control", s, 1, 1, b""), "BadControlJson")
    add_invalid("control-not-json", packet("control", s, 1, 1, b"hello"), "BadControlJson")
    add_invalid("control-array", packet("control", s, 1, 1, b"[1,2]"), "BadControlJson")
    add_invalid("control-no-type", packet("control", s, 1, 1, b'{"turn_id":1}'), "BadControlJson")
    add_invalid("control-type-number", packet("control", s, 1, 1, b'{"type":3}'), "BadControlJson")
    add_invalid("control-truncated-json", packet("control", s, 1, 1, b'{"type":"a"'), "BadControlJson")
    add_invalid("control-bad-utf8", packet("control", s, 1, 1, b'{"type":"\xff\xfe"}'), "BadControlJson")
    add_invalid("server-event-not-json", packet("server-event", s, 1, 1, b"nope"), "BadControlJson")

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    doc = {"header_size": HEADER.size, "seed": args.seed, "valid": valid, "invalid": invalid}
    out.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"{len(valid)} valid, {len(invalid)} invalid -> {out}")


if __name__ == "__main__":
    main()
