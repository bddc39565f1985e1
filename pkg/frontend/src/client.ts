/**
 * Blocking-style client for one agent slot on a match server.
 *
 * Usage:
 *   const session = await connect("127.0.0.1:4000", "my-bot");
 *   const score = await runAgent(session, (view) => "N");
 *
 * One session drives one agent slot; run several sessions for team play.
 * The session keeps its own centipoint ledger from step_result frames,
 * which must equal the server's total for the slot at match_end.
 */

import * as net from "node:net";

import {
  FrameReader,
  Message,
  PROTOCOL_VERSION,
  CENTI_PER_POINT,
  decode,
  encode,
  makeMessage,
} from "./protocol.js";

export class ClientError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ClientError";
  }
}

/** Server refused the handshake (bad version, bad token, slots full). */
export class HandshakeRefusedError extends ClientError {
  constructor(message: string) {
    super(message);
    this.name = "HandshakeRefusedError";
  }
}

/** Connection died mid-match; carries the score collected so far. */
export class ConnectionLostError extends ClientError {
  readonly partialScoreCp: number;

  constructor(message: string, partialScoreCp: number) {
    super(message);
    this.name = "ConnectionLostError";
    this.partialScoreCp = partialScoreCp;
  }
}

export interface EpisodeSummary {
  total_rewards: Record<string, number>;
  ticks_elapsed: number;
  termination: string;
}

export interface MatchOutcome {
  /** This slot's cumulative reward in centipoints, from step_result frames. */
  scoreCp: number;
  /** Same ledger in decimal points. */
  score: number;
  /** Per-slot totals reported by the server at match_end. */
  serverScores: Record<string, number>;
  ticks: number;
  result: EpisodeSummary | null;
}

export type Policy = (
  view: Record<string, unknown>,
  session: ClientSession,
) => string | unknown[] | null;

export interface ConnectOptions {
  protocolVersion?: number;
  authToken?: string;
  timeoutMs?: number;
}

export class ClientSession {
  readonly entryName: string;
  agentSlot = -1;
  matchId = "";
  game = "";
  /** Task description string from the welcome frame. */
  task = "";
  scoreCp = 0;
  lastObservation: Record<string, unknown> | null = null;

  private socket: net.Socket;
  private reader = new FrameReader();
  private queue: Message[] = [];
  private waiters: Array<{
    resolve: (m: Message) => void;
    reject: (e: Error) => void;
  }> = [];
  private closedWith: Error | null = null;

  constructor(socket: net.Socket, entryName: string) {
    this.socket = socket;
    this.entryName = entryName;
    socket.on("data", (data: Buffer) => {
      for (const line of this.reader.feed(data)) {
        let msg: Message;
        try {
          msg = decode(line);
        } catch {
          continue; // a garbled server line is not the client's problem
        }
        this.push(msg);
      }
    });
    const die = (err: Error) => {
      if (this.closedWith === null) {
        this.closedWith = err;
      }
      for (const w of this.waiters.splice(0)) {
        w.reject(new ConnectionLostError(err.message, this.scoreCp));
      }
    };
    socket.on("error", (err) => die(err));
    socket.on("close", () => die(new Error("server closed the connection")));
  }

  private push(msg: Message) {
    const waiter = this.waiters.shift();
    if (waiter) {
      waiter.resolve(msg);
    } else {
      this.queue.push(msg);
    }
  }

  /** Next frame from the server, in arrival order. */
  nextMessage(): Promise<Message> {
    const queued = this.queue.shift();
    if (queued) {
      return Promise.resolve(queued);
    }
    if (this.closedWith) {
      return Promise.reject(
        new ConnectionLostError(this.closedWith.message, this.scoreCp),
      );
    }
    return new Promise((resolve, reject) =>
      this.waiters.push({ resolve, reject }),
    );
  }

  send(msg: Message) {
    this.socket.write(encode(msg));
  }

  close() {
    this.socket.destroy();
  }
}

/** Dial the server and complete the hello/welcome handshake. */
export async function connect(
  address: string,
  entryName: string,
  options: ConnectOptions = {},
): Promise<ClientSession> {
  const sep = address.lastIndexOf(":");
  const host = sep === -1 ? "127.0.0.1" : address.slice(0, sep);
  const port = Number(address.slice(sep + 1));
  const timeoutMs = options.timeoutMs ?? 10_000;

  const socket = await new Promise<net.Socket>((resolve, reject) => {
    const s = net.createConnection({ host, port }, () => {
      s.setTimeout(0);
      resolve(s);
    });
    s.setTimeout(timeoutMs, () => {
      s.destroy();
      reject(new ClientError(`connect to ${address} timed out`));
    });
    s.on("error", (err) => reject(new ClientError(err.message)));
  });

  const session = new ClientSession(socket, entryName);
  const payload: Record<string, unknown> = { entry_name: entryName };
  if (options.authToken !== undefined) {
    payload.auth_token = options.authToken;
  }
  const hello = makeMessage("hello", payload);
  hello.protocol_version = options.protocolVersion ?? PROTOCOL_VERSION;
  session.send(hello);

  const reply = await session.nextMessage();
  if (reply.type === "error") {
    session.close();
    throw new HandshakeRefusedError(String(reply.payload.message));
  }
  if (reply.type !== "welcome") {
    session.close();
    throw new ClientError(`expected welcome, got '${reply.type}'`);
  }
  session.agentSlot = reply.payload.agent_slot as number;
  session.matchId = reply.payload.match_id as string;
  session.game = reply.payload.game as string;
  session.task = reply.payload.task as string;
  return session;
}

/**
 * Drive the observation -> policy -> action loop until match_end.
 *
 * A policy that returns null skips the tick (the server substitutes the
 * game's no-op after its action timeout).  A policy that throws sends no
 * frame for that tick; the error is re-raised after the tick so the
 * server-side substitution still lands cleanly.
 */
export async function runAgent(
  session: ClientSession,
  policy: Policy,
): Promise<MatchOutcome> {
  let ticks = 0;
  let result: EpisodeSummary | null = null;
  let policyError: Error | null = null;

  for (;;) {
    const msg = await session.nextMessage();
    switch (msg.type) {
      case "observation": {
        const p = msg.payload;
        const view = p.view as Record<string, unknown>;
        session.lastObservation = view;
        if (policyError === null) {
          let action: string | unknown[] | null = null;
          try {
            action = policy(view, session);
          } catch (e) {
            policyError = e as Error;
          }
          if (action !== null && policyError === null) {
            session.send(
              makeMessage("action", {
                match_id: p.match_id,
                tick: p.tick,
                action,
              }),
            );
          }
        }
        break;
      }
      case "step_result": {
        session.scoreCp += msg.payload.reward as number;
        ticks += 1;
        if (policyError !== null) {
          session.close();
          throw policyError;
        }
        break;
      }
      case "episode_end":
        result = msg.payload.result as unknown as EpisodeSummary;
        break;
      case "match_end":
        return {
          scoreCp: session.scoreCp,
          score: session.scoreCp / CENTI_PER_POINT,
          serverScores: msg.payload.scores as Record<string, number>,
          ticks,
          result,
        };
      case "error":
        break; // nonfatal server complaint; keep playing
      default:
        break; // ping/pong and anything else is ignorable here
    }
  }
}
