// Typed client for the service API. All numbers the UI shows originate
// from these responses; nothing is computed client-side.

import {
  ApiError,
  FeedbackKind,
  FeedbackResponse,
  MoodResponse,
  RecommendationItem,
} from './types.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class MoodtunesClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async submitSelfReport(userId: string, label: string): Promise<MoodResponse> {
    return this.request<MoodResponse>('/mood', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ user_id: userId, self_report: label }),
    });
  }

  async submitMoodImage(userId: string, imageBase64: string): Promise<MoodResponse> {
    return this.request<MoodResponse>('/mood', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ user_id: userId, image: imageBase64 }),
    });
  }

  async recommendations(userId: string, k = 10): Promise<RecommendationItem[]> {
    const params = new URLSearchParams({ user_id: userId, k: String(k) });
    return this.request<RecommendationItem[]>(`/recommendations?${params}`, { method: 'GET' });
  }

  async sendFeedback(
    userId: string,
    songId: string,
    feedback: FeedbackKind,
  ): Promise<FeedbackResponse> {
    return this.request<FeedbackResponse>('/feedback', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ user_id: userId, song_id: songId, feedback }),
    });
  }

  private async request<T>(path: string, init: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let code = `http_${response.status}`;
      let detail = response.statusText || 'request failed';
      try {
        const body = (await response.json()) as { error?: string; detail?: string };
        if (body.error) code = body.error;
        if (body.detail) detail = body.detail;
      } catch {
        // non-JSON error body: keep the status-derived message
      }
      throw new ApiError(response.status, code, detail);
    }
    return (await response.json()) as T;
  }
}
