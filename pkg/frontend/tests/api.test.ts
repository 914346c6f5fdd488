import { describe, expect, it, vi } from 'vitest';

import { MoodtunesClient } from '../src/api.js';
import { ApiError } from '../src/types.js';

const jsonResponse = (body: unknown, status = 200) =>
  new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });

describe('MoodtunesClient', () => {
  it('posts self-report moods and parses the report', async () => {
    const fetchFn = vi.fn().mockResolvedValue(
      jsonResponse({
        reported: ['happy'],
        distribution: { happy: 1, sad: 0, surprise: 0, disgust: 0, neutral: 0 },
        threshold: 0.3,
      }),
    );
    const client = new MoodtunesClient('', fetchFn);
    const mood = await client.submitSelfReport('u1', 'happy');
    expect(mood.reported).toEqual(['happy']);
    const [url, init] = fetchFn.mock.calls[0]!;
    expect(url).toBe('/mood');
    expect(init.method).toBe('POST');
    expect(JSON.parse(init.body)).toEqual({ user_id: 'u1', self_report: 'happy' });
  });

  it('posts image moods with the base64 payload', async () => {
    const fetchFn = vi.fn().mockResolvedValue(
      jsonResponse({ reported: ['sad'], distribution: { sad: 1 }, threshold: 0.3 }),
    );
    const client = new MoodtunesClient('', fetchFn);
    await client.submitMoodImage('u1', 'UDUK...');
    const [, init] = fetchFn.mock.calls[0]!;
    expect(JSON.parse(init.body)).toEqual({ user_id: 'u1', image: 'UDUK...' });
  });

  it('fetches recommendations with user and k query parameters', async () => {
    const fetchFn = vi.fn().mockResolvedValue(jsonResponse([]));
    const client = new MoodtunesClient('http://svc', fetchFn);
    await client.recommendations('u2', 7);
    expect(fetchFn.mock.calls[0]![0]).toBe('http://svc/recommendations?user_id=u2&k=7');
  });

  it('sends feedback and returns the token balance', async () => {
    const fetchFn = vi.fn().mockResolvedValue(
      jsonResponse({ user_id: 'u1', token_balance: 4 }),
    );
    const client = new MoodtunesClient('', fetchFn);
    const result = await client.sendFeedback('u1', 's9', 'like');
    expect(result.token_balance).toBe(4);
    expect(JSON.parse(fetchFn.mock.calls[0]![1].body)).toEqual({
      user_id: 'u1',
      song_id: 's9',
      feedback: 'like',
    });
  });

  it('turns service errors into ApiError with code and detail', async () => {
    const fetchFn = vi.fn().mockResolvedValue(
      jsonResponse({ error: 'no_mood_set', detail: 'submit a mood first' }, 409),
    );
    const client = new MoodtunesClient('', fetchFn);
    const failure = await client.recommendations('u1').catch((e) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.status).toBe(409);
    expect(failure.code).toBe('no_mood_set');
    expect(failure.detail).toBe('submit a mood first');
  });

  it('copes with non-JSON error bodies', async () => {
    const fetchFn = vi.fn().mockResolvedValue(new Response('boom', { status: 500 }));
    const client = new MoodtunesClient('', fetchFn);
    const failure = await client.recommendations('u1').catch((e) => e);
    expect(failure).toBeInstanceOf(ApiError);
    expect(failure.code).toBe('http_500');
  });
});
