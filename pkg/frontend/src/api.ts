import { JudgmentBody, NextResponse, Progress } from './types.js';

/** HTTP error with the server's explanation attached. */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function asJson(resp: Response): Promise<any> {
  let body: any = null;
  try {
    body = await resp.json();
  } catch {
    // fall through with the status line only
  }
  if (!resp.ok) {
    throw new ApiError(resp.status, body?.error ?? `HTTP ${resp.status}`);
  }
  return body;
}

export class Client {
  constructor(private readonly baseUrl: string = '') {}

  next(annotator: string): Promise<NextResponse> {
    const query = new URLSearchParams({ annotator });
    return fetch(`${this.baseUrl}/api/next?${query}`).then(asJson);
  }

  submit(body: JudgmentBody): Promise<{ ok: boolean; judged: number }> {
    return fetch(`${this.baseUrl}/api/judgment`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    }).then(asJson);
  }

  progress(): Promise<Progress> {
    return fetch(`${this.baseUrl}/api/progress`).then(asJson);
  }
}
