// Poll a service job until it leaves the pending state.  Round closes
// at a million trials take seconds; the UI polls instead of holding a
// request open.

import type { ApiClient } from './api.js';
import type { JobState } from './model.js';

export class JobFailedError extends Error {
  constructor(public readonly errorType: string, message: string) {
    super(message);
    this.name = 'JobFailedError';
  }
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function pollJobUntilDone<T>(
  client: ApiClient,
  jobId: string,
  options?: { intervalMs?: number; timeoutMs?: number; onPoll?: (state: JobState<T>) => void },
): Promise<T> {
  const intervalMs = options?.intervalMs ?? 750;
  const timeoutMs = options?.timeoutMs ?? 300_000;
  const startedAt = Date.now();
  for (;;) {
    const state = await client.getJob<T>(jobId);
    options?.onPoll?.(state);
    if (state.status === 'done') {
      return state.result as T;
    }
    if (state.status === 'failed') {
      throw new JobFailedError(
        state.error?.type ?? 'JobError',
        state.error?.message ?? 'job failed',
      );
    }
    if (Date.now() - startedAt > timeoutMs) {
      throw new JobFailedError('Timeout', `job ${jobId} still pending after ${timeoutMs}ms`);
    }
    await sleep(intervalMs);
  }
}
