/**
 * Server-sent event client over fetch streaming, so the same code runs in
 * browsers and under node-based tests. Events are applied strictly in
 * revision order; anything at or below the cursor is discarded.
 */

import type { ChangeEventDto } from "./types.js";

export function parseSseChunk(buffer: string): { frames: string[]; rest: string } {
  const frames: string[] = [];
  let rest = buffer;
  for (;;) {
    const cut = rest.indexOf("\n\n");
    if (cut < 0) {
      return { frames, rest };
    }
    frames.push(rest.slice(0, cut));
    rest = rest.slice(cut + 2);
  }
}

export function dataOfFrame(frame: string): string | null {
  const parts: string[] = [];
  for (const line of frame.split("\n")) {
    if (line.startsWith("data:")) {
      parts.push(line.slice(5).trimStart());
    }
  }
  return parts.length ? parts.join("\n") : null;
}

/** Orders incoming events and drops stale or duplicate revisions. */
export class RevisionGate {
  constructor(public cursor: number = 0) {}

  admit(event: ChangeEventDto): boolean {
    if (event.revision <= this.cursor) {
      return false;
    }
    this.cursor = event.revision;
    return true;
  }
}

export interface EventStreamHandle {
  close(): void;
}

export function subscribeEvents(
  baseUrl: string,
  since: number,
  onEvent: (event: ChangeEventDto) => void,
  fetchImpl: typeof fetch = fetch,
): EventStreamHandle {
  const controller = new AbortController();
  const gate = new RevisionGate(since);

  (async () => {
    try {
      const response = await fetchImpl(`${baseUrl}/api/v1/events?since=${since}`, {
        signal: controller.signal,
      });
      if (!response.ok || !response.body) {
        return;
      }
      const reader = response.body.getReader();
      const decoder = new TextDecoder();
      let buffer = "";
      for (;;) {
        const { done, value } = await reader.read();
        if (done) {
          return;
        }
        buffer += decoder.decode(value, { stream: true });
        const { frames, rest } = parseSseChunk(buffer);
        buffer = rest;
        for (const frame of frames) {
          const data = dataOfFrame(frame);
          if (!data) {
            continue; // keep-alive comment
          }
          const event = JSON.parse(data) as ChangeEventDto;
          if (gate.admit(event)) {
            onEvent(event);
          }
        }
      }
    } catch {
      // aborted or connection lost; the app reconnects on demand
    }
  })();

  return { close: () => controller.abort() };
}
