// Pure view-model builders. Everything rendered derives from a service
// response; these functions shape, they never score.

import { MoodResponse, RecommendationItem } from './types.js';

export interface Badge {
  label: string;
  text: string;
  probabilityText: string;
}

const capitalize = (s: string) => (s ? s[0]!.toUpperCase() + s.slice(1) : s);

export function moodBadges(mood: MoodResponse): Badge[] {
  return mood.reported.map((label) => ({
    label,
    text: `${capitalize(label)} mood detected`,
    probabilityText: `${Math.round((mood.distribution[label] ?? 0) * 100)}%`,
  }));
}

export interface BarDatum {
  label: string;
  fraction: number;
  percentText: string;
}

export function distributionBars(mood: MoodResponse): BarDatum[] {
  return Object.entries(mood.distribution).map(([label, p]) => ({
    label,
    fraction: p,
    percentText: `${(p * 100).toFixed(1)}%`,
  }));
}

export interface CardView {
  songId: string;
  title: string;
  artist: string;
  scoreText: string;
  componentsText: string;
}

export function recommendationCards(items: RecommendationItem[]): CardView[] {
  // card order must match the service ranking exactly
  return items.map((item) => ({
    songId: item.song_id,
    title: item.title,
    artist: item.artist,
    scoreText: item.score.toFixed(3),
    componentsText:
      `emotion ${item.components.emotion_affinity.toFixed(2)} | ` +
      `collab ${item.components.cf_score.toFixed(2)} | ` +
      `content ${item.components.content_score.toFixed(2)}`,
  }));
}

// Client-side precondition: exactly one mood channel must be chosen.
// Returns an inline validation message, or null when the form is valid.
export function validateMoodForm(label: string | null, hasFile: boolean): string | null {
  if (label && hasFile) {
    return 'Pick a mood or upload an image, not both.';
  }
  if (!label && !hasFile) {
    return 'Pick a mood or upload an image first.';
  }
  return null;
}
