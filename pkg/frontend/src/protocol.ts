/**
 * Wire protocol: newline-delimited JSON frames over TCP.
 *
 * One frame is one LF-terminated UTF-8 line holding a single JSON object
 * {"type": ..., "payload": {...}}, with "protocol_version" present on
 * hello and welcome frames.  Encoding is canonical (keys sorted at every
 * level, no whitespace) so frames are byte-identical to the server's own
 * encoder for equal messages.  Rewards on the wire are integer
 * centipoints (1 point = 100 cp), which keeps client-side accumulation
 * exact.
 */

export const PROTOCOL_VERSION = 1;
export const MAX_FRAME_BYTES = 1 << 20;
export const CENTI_PER_POINT = 100;

export type MessageType =
  | "hello"
  | "welcome"
  | "observation"
  | "action"
  | "step_result"
  | "episode_end"
  | "match_end"
  | "error"
  | "ping"
  | "pong";

export interface Message {
  type: MessageType;
  payload: Record<string, unknown>;
  protocol_version?: number;
}

export class ProtocolError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ProtocolError";
  }
}

/** Required payload keys per message type. */
const SCHEMAS: Record<MessageType, readonly string[]> = {
  hello: ["entry_name"],
  welcome: ["agent_slot", "match_id", "game", "task"],
  observation: ["match_id", "tick", "agent_slot", "view", "score_so_far"],
  action: ["match_id", "tick", "action"],
  step_result: ["tick", "reward", "done"],
  episode_end: ["result"],
  match_end: ["match_id", "scores"],
  error: ["message"],
  ping: [],
  pong: [],
};

const VERSIONED = new Set<MessageType>(["hello", "welcome"]);

export function makeMessage(
  type: MessageType,
  payload: Record<string, unknown> = {},
): Message {
  const msg: Message = { type, payload };
  if (VERSIONED.has(type)) {
    msg.protocol_version = PROTOCOL_VERSION;
  }
  return msg;
}

// the server emits ASCII-only JSON; escape the rest the same way
function asciiJson(value: unknown): string {
  return JSON.stringify(value).replace(
    /[-￿]/g,
    (c) => "\\u" + c.charCodeAt(0).toString(16).padStart(4, "0"),
  );
}

/** JSON with sorted keys, no whitespace, ASCII-only escapes. */
export function canonicalJson(value: unknown): string {
  if (value === null || typeof value !== "object") {
    return asciiJson(value);
  }
  if (Array.isArray(value)) {
    return "[" + value.map(canonicalJson).join(",") + "]";
  }
  const obj = value as Record<string, unknown>;
  const keys = Object.keys(obj).sort();
  const parts = keys.map((k) => asciiJson(k) + ":" + canonicalJson(obj[k]));
  return "{" + parts.join(",") + "}";
}

function check(msg: unknown): Message {
  if (typeof msg !== "object" || msg === null || Array.isArray(msg)) {
    throw new ProtocolError("frame must be a JSON object");
  }
  const m = msg as Record<string, unknown>;
  const type = m.type as MessageType;
  if (typeof type !== "string" || !(type in SCHEMAS)) {
    throw new ProtocolError(`unknown message type ${JSON.stringify(m.type)}`);
  }
  const payload = m.payload;
  if (typeof payload !== "object" || payload === null || Array.isArray(payload)) {
    throw new ProtocolError("missing or invalid field 'payload'");
  }
  for (const key of SCHEMAS[type]) {
    if (!(key in (payload as Record<string, unknown>))) {
      throw new ProtocolError(
        `message '${type}' is missing field 'payload.${key}'`,
      );
    }
  }
  if (VERSIONED.has(type) && !Number.isInteger(m.protocol_version)) {
    throw new ProtocolError(
      `message '${type}' is missing field 'protocol_version'`,
    );
  }
  return m as unknown as Message;
}

export function encode(msg: Message): Buffer {
  check(msg);
  const data = Buffer.from(canonicalJson(msg) + "\n", "utf-8");
  if (data.length > MAX_FRAME_BYTES) {
    throw new ProtocolError("frame exceeds 1 MiB");
  }
  return data;
}

export function decode(line: Buffer | string): Message {
  const data = typeof line === "string" ? Buffer.from(line, "utf-8") : line;
  if (data.length > MAX_FRAME_BYTES) {
    throw new ProtocolError("frame exceeds 1 MiB");
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(data.toString("utf-8"));
  } catch (e) {
    throw new ProtocolError(`malformed frame: ${(e as Error).message}`);
  }
  return check(parsed);
}

/** Splits a byte stream into frames, resynchronizing at each newline. */
export class FrameReader {
  private buf = Buffer.alloc(0);

  feed(data: Buffer): Buffer[] {
    this.buf = Buffer.concat([this.buf, data]);
    if (this.buf.length > MAX_FRAME_BYTES) {
      this.buf = Buffer.alloc(0);
      throw new ProtocolError("frame exceeds 1 MiB");
    }
    const lines: Buffer[] = [];
    let idx: number;
    while ((idx = this.buf.indexOf(0x0a)) !== -1) {
      const line = this.buf.subarray(0, idx);
      this.buf = this.buf.subarray(idx + 1);
      if (line.toString("utf-8").trim().length > 0) {
        lines.push(line);
      }
    }
    return lines;
  }
}
