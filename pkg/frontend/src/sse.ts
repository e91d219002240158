// Server-sent-events reader over fetch streams.
//
// Implemented directly on ReadableStream rather than EventSource so the same
// code runs in the browser and under node tests, and so reconnects can resume
// from an explicit cursor.

export interface SseMessage {
  id: string | null;
  data: string;
}

export interface SseConnection {
  done: Promise<void>;
  abort(): void;
}

export function connectSse(url: string, onMessage: (msg: SseMessage) => void): SseConnection {
  const controller = new AbortController();
  const done = (async () => {
    const response = await fetch(url, {
      signal: controller.signal,
      headers: { accept: "text/event-stream" },
    });
    if (!response.ok || !response.body) {
      throw new Error(`stream rejected: ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    try {
      for (;;) {
        const { value, done: finished } = await reader.read();
        if (finished) break;
        buffer += decoder.decode(value, { stream: true });
        let boundary = buffer.indexOf("\n\n");
        while (boundary !== -1) {
          const block = buffer.slice(0, boundary);
          buffer = buffer.slice(boundary + 2);
          const message = parseBlock(block);
          if (message) onMessage(message);
          boundary = buffer.indexOf("\n\n");
        }
      }
    } finally {
      reader.releaseLock();
    }
  })();
  return {
    done: done.catch((error: unknown) => {
      if (controller.signal.aborted) return; // deliberate disconnect
      throw error;
    }),
    abort: () => controller.abort(),
  };
}

function parseBlock(block: string): SseMessage | null {
  let id: string | null = null;
  const data: string[] = [];
  for (const line of block.split("\n")) {
    if (line.startsWith("id:")) id = line.slice(3).trim();
    else if (line.startsWith("data:")) data.push(line.slice(5).trimStart());
  }
  if (!data.length) return null;
  return { id, data: data.join("\n") };
}
