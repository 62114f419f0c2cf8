// Minimal server-sent-events reader over fetch streams.
// Works in browsers and Node 20 without the EventSource global.

export interface SseMessage {
  event: string;
  data: string;
  id: string;
}

export function parseSseChunk(buffer: string): { messages: SseMessage[]; rest: string } {
  const messages: SseMessage[] = [];
  const blocks = buffer.split('\n\n');
  const rest = blocks.pop() ?? '';
  for (const block of blocks) {
    const message: SseMessage = { event: 'message', data: '', id: '' };
    const dataLines: string[] = [];
    for (const line of block.split('\n')) {
      if (line.startsWith('data: ')) dataLines.push(line.slice(6));
      else if (line.startsWith('data:')) dataLines.push(line.slice(5));
      else if (line.startsWith('event: ')) message.event = line.slice(7);
      else if (line.startsWith('id: ')) message.id = line.slice(4);
    }
    message.data = dataLines.join('\n');
    if (message.data.length > 0 || message.id.length > 0) messages.push(message);
  }
  return { messages, rest };
}

export async function streamSse(
  url: string,
  onMessage: (message: SseMessage) => void,
  signal?: AbortSignal,
): Promise<void> {
  const response = await fetch(url, {
    headers: { Accept: 'text/event-stream' },
    signal,
  });
  if (!response.ok || !response.body) {
    throw new Error(`event stream failed: ${response.status}`);
  }
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  let buffer = '';
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      const { messages, rest } = parseSseChunk(buffer);
      buffer = rest;
      for (const message of messages) onMessage(message);
    }
  } finally {
    reader.releaseLock();
  }
}
