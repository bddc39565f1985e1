/**
 * Runnable example: connect a random agent to a server started with e.g.
 *
 *   gridarena taskgen --game mobchase --difficulty small --seed 1 --out task.json
 *   gridarena serve --task task.json --agents remote,greedy_chaser --addr 127.0.0.1:4100
 *
 * then:
 *
 *   npx ts-node --esm examples/random-agent.ts 127.0.0.1:4100 my-bot
 */

import { connect, runAgent } from "../src/index.js";
import { randomPolicy } from "../src/randomAgent.js";

const address = process.argv[2] ?? "127.0.0.1:4100";
const name = process.argv[3] ?? "random-example";

const session = await connect(address, name);
console.log(`playing ${session.game} as slot ${session.agentSlot}`);

const outcome = await runAgent(session, randomPolicy(Date.now() & 0xffff));
console.log(
  `final score: ${outcome.score} points over ${outcome.ticks} ticks`,
  outcome.result?.termination ? `(${outcome.result.termination})` : "",
);
session.close();
