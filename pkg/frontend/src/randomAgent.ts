/**
 * A uniform-random policy usable on any of the three games — the smallest
 * possible working entry, and the one the integration tests drive.
 */

import { Policy } from "./client.js";

const DIRS = ["N", "E", "S", "W"] as const;

/** Seedable xorshift so test runs are reproducible. */
export function randomPolicy(seed = 1): Policy {
  let s = seed >>> 0 || 1;
  const next = () => {
    s ^= s << 13;
    s >>>= 0;
    s ^= s >> 17;
    s ^= s << 5;
    s >>>= 0;
    return s / 0x100000000;
  };
  const pick = <T>(items: readonly T[]): T =>
    items[Math.floor(next() * items.length)];

  return (view) => {
    const game = view.game as string;
    if (game === "mobchase") {
      return pick([...DIRS, "stay"]);
    }
    if (game === "buildbattle") {
      const kind = pick([...DIRS, "stay", "place", "remove"]);
      if (kind === "place") {
        const palette = (view.palette as string[]) ?? ["stone"];
        const [dx, dz] = pick([[0, -1], [1, 0], [0, 1], [-1, 0]] as const);
        const height = (view.blueprint_dims as number[])?.[1] ?? 1;
        return ["place", pick(palette), dx, dz, Math.floor(next() * height)];
      }
      if (kind === "remove") {
        const [dx, dz] = pick([[0, -1], [1, 0], [0, 1], [-1, 0]] as const);
        const height = (view.blueprint_dims as number[])?.[1] ?? 1;
        return ["remove", dx, dz, Math.floor(next() * height)];
      }
      return kind;
    }
    // treasurehunt
    const kind = pick([...DIRS, "stay", "pickup", "attack"]);
    if (kind === "attack") {
      return ["attack", pick(DIRS)];
    }
    return kind;
  };
}
