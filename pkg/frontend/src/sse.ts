/** Server-sent-events client with resume and backoff.
 *
 * Reconnects send the last seen seq in the Last-Event-ID header, so the
 * server replays exactly what was missed: the seq guard below drops any
 * overlap, giving the store a gap-free, duplicate-free record stream.
 * Built on fetch streaming so the same code runs in the browser and in
 * node-based tests.
 */

import type { EventRecord } from './types.js';

export interface SseClientOptions {
  fetchImpl?: typeof fetch;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export class SseClient {
  lastEventId = 0;
  onEvent: (record: EventRecord) => void = () => {};
  onStateChange: (connected: boolean) => void = () => {};

  private running = false;
  private controller: AbortController | null = null;
  private readonly fetchImpl: typeof fetch;
  private readonly initialBackoffMs: number;
  private readonly maxBackoffMs: number;
  private readonly sleep: (ms: number) => Promise<void>;

  constructor(
    private readonly url: string,
    options: SseClientOptions = {},
  ) {
    this.fetchImpl = options.fetchImpl ?? fetch;
    this.initialBackoffMs = options.initialBackoffMs ?? 500;
    this.maxBackoffMs = options.maxBackoffMs ?? 10_000;
    this.sleep = options.sleep ?? defaultSleep;
  }

  start(): Promise<void> {
    if (this.running) return Promise.resolve();
    this.running = true;
    return this.loop();
  }

  stop(): void {
    this.running = false;
    this.controller?.abort();
  }

  private async loop(): Promise<void> {
    let backoff = this.initialBackoffMs;
    while (this.running) {
      try {
        await this.consumeStream();
        backoff = this.initialBackoffMs; // we did connect; reset for next drop
      } catch {
        // fall through to backoff
      }
      this.onStateChange(false);
      if (!this.running) return;
      await this.sleep(backoff);
      backoff = Math.min(backoff * 2, this.maxBackoffMs);
    }
  }

  private async consumeStream(): Promise<void> {
    this.controller = new AbortController();
    const headers: Record<string, string> = { Accept: 'text/event-stream' };
    if (this.lastEventId > 0) {
      headers['Last-Event-ID'] = String(this.lastEventId);
    }
    const response = await this.fetchImpl(this.url, {
      headers,
      signal: this.controller.signal,
    });
    if (!response.ok || !response.body) {
      throw new Error(`stream rejected: ${response.status}`);
    }
    this.onStateChange(true);

    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = '';
    for (;;) {
      const { done, value } = await reader.read();
      if (done) return;
      buffer += decoder.decode(value, { stream: true });
      let split = buffer.indexOf('\n\n');
      while (split >= 0) {
        this.handleFrame(buffer.slice(0, split));
        buffer = buffer.slice(split + 2);
        split = buffer.indexOf('\n\n');
      }
    }
  }

  private handleFrame(frame: string): void {
    const dataLines: string[] = [];
    for (const line of frame.split('\n')) {
      if (line.startsWith('data:')) {
        dataLines.push(line.slice(5).trimStart());
      }
      // id: is also inside the JSON payload as seq; comments are ignored
    }
    if (dataLines.length === 0) return; // keepalive
    let record: EventRecord;
    try {
      record = JSON.parse(dataLines.join('\n')) as EventRecord;
    } catch {
      return; // not ours; ignore rather than kill the stream
    }
    if (typeof record.seq !== 'number' || record.seq <= this.lastEventId) {
      return; // replay overlap after resume
    }
    this.lastEventId = record.seq;
    this.onEvent(record);
  }
}
