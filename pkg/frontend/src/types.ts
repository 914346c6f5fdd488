// Wire types for the recommendation service JSON API.

export interface MoodResponse {
  reported: string[];
  distribution: Record<string, number>;
  threshold: number;
}

export interface RecommendationComponents {
  emotion_affinity: number;
  cf_score: number;
  content_score: number;
}

export interface RecommendationItem {
  song_id: string;
  title: string;
  artist: string;
  score: number;
  components: RecommendationComponents;
}

export interface FeedbackResponse {
  user_id: string;
  token_balance: number;
}

export type FeedbackKind = 'like' | 'skip';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    public readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = 'ApiError';
  }
}
