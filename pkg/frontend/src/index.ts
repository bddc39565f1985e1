export {
  PROTOCOL_VERSION,
  MAX_FRAME_BYTES,
  CENTI_PER_POINT,
  ProtocolError,
  FrameReader,
  makeMessage,
  canonicalJson,
  encode,
  decode,
} from "./protocol.js";
export type { Message, MessageType } from "./protocol.js";

export {
  ClientError,
  HandshakeRefusedError,
  ConnectionLostError,
  ClientSession,
  connect,
  runAgent,
} from "./client.js";
export type {
  ConnectOptions,
  EpisodeSummary,
  MatchOutcome,
  Policy,
} from "./client.js";

export { randomPolicy } from "./randomAgent.js";
