// Polling for long-running service jobs (round close, planning).

import { describe, expect, it } from 'vitest';

import type { ApiClient } from '../src/api.js';
import type { JobState } from '../src/model.js';
import { JobFailedError, pollJobUntilDone } from '../src/jobs.js';
import doneFixture from './fixtures/round_close_done.json';
import failedFixture from './fixtures/round_close_failed.json';

function clientReplaying(states: JobState[]): ApiClient {
  let call = 0;
  return {
    getJob: async () => states[Math.min(call++, states.length - 1)],
  } as unknown as ApiClient;
}

describe('pollJobUntilDone', () => {
  it('waits through pending states and returns the result', async () => {
    const client = clientReplaying([
      { status: 'pending' },
      { status: 'pending' },
      doneFixture as JobState,
    ]);
    const result = await pollJobUntilDone<{ decisions: Record<string, string> }>(
      client, 'job-1', { intervalMs: 1 },
    );
    expect(result.decisions).toEqual({ mayor: 'stop' });
  });

  it('raises the recorded failure for an incomplete round', async () => {
    const client = clientReplaying([failedFixture as JobState]);
    await expect(
      pollJobUntilDone(client, 'job-2', { intervalMs: 1 }),
    ).rejects.toThrowError(JobFailedError);
    await expect(
      pollJobUntilDone(client, 'job-2', { intervalMs: 1 }),
    ).rejects.toThrowError(/incomplete/);
  });

  it('times out if the job never settles', async () => {
    const client = clientReplaying([{ status: 'pending' }]);
    await expect(
      pollJobUntilDone(client, 'job-3', { intervalMs: 1, timeoutMs: 5 }),
    ).rejects.toThrowError(/pending/);
  });
});
