// Controller wiring the DOM to the service client. One in-flight request
// per action (buttons disable while pending); every service error becomes
// a visible error banner; the token balance always shows the value the
// service last returned.

import { MoodtunesClient } from './api.js';
import { ApiError, FeedbackKind } from './types.js';
import {
  distributionBars,
  moodBadges,
  recommendationCards,
  validateMoodForm,
} from './views.js';

export interface AppElements {
  moodForm: HTMLFormElement;
  imageInput: HTMLInputElement;
  submitButton: HTMLButtonElement;
  refreshButton: HTMLButtonElement;
  badges: HTMLElement;
  bars: HTMLElement;
  cards: HTMLElement;
  balance: HTMLElement;
  error: HTMLElement;
}

export function queryElements(doc: Document): AppElements {
  const byId = <T extends HTMLElement>(id: string): T => {
    const el = doc.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
  };
  return {
    moodForm: byId<HTMLFormElement>('mood-form'),
    imageInput: byId<HTMLInputElement>('mood-image'),
    submitButton: byId<HTMLButtonElement>('mood-submit'),
    refreshButton: byId<HTMLButtonElement>('refresh-recs'),
    badges: byId('mood-badges'),
    bars: byId('mood-bars'),
    cards: byId('rec-cards'),
    balance: byId('token-balance'),
    error: byId('error-banner'),
  };
}

export const readFileBase64 = async (file: File): Promise<string> => {
  const buffer = await file.arrayBuffer();
  let binary = '';
  for (const byte of new Uint8Array(buffer)) {
    binary += String.fromCharCode(byte);
  }
  return btoa(binary);
};

export class App {
  constructor(
    private readonly doc: Document,
    private readonly el: AppElements,
    private readonly client: MoodtunesClient,
    private readonly userId: string = 'web-user',
    private readonly fileReader: (f: File) => Promise<string> = readFileBase64,
  ) {}

  init(): void {
    this.el.moodForm.addEventListener('submit', (event) => {
      event.preventDefault();
      void this.submitMood();
    });
    this.el.refreshButton.addEventListener('click', () => {
      void this.refreshRecommendations();
    });
  }

  showError(message: string): void {
    this.el.error.textContent = message;
    this.el.error.classList.remove('hidden');
  }

  clearError(): void {
    this.el.error.textContent = '';
    this.el.error.classList.add('hidden');
  }

  private selectedLabel(): string | null {
    const checked = this.el.moodForm.querySelector<HTMLInputElement>(
      'input[name="mood"]:checked',
    );
    return checked ? checked.value : null;
  }

  async submitMood(): Promise<void> {
    this.clearError();
    const label = this.selectedLabel();
    const file = this.el.imageInput.files?.[0] ?? null;
    // validate locally: an invalid form never reaches the network
    const problem = validateMoodForm(label, file !== null);
    if (problem) {
      this.showError(problem);
      return;
    }
    this.el.submitButton.disabled = true;
    try {
      const mood = label
        ? await this.client.submitSelfReport(this.userId, label)
        : await this.client.submitMoodImage(this.userId, await this.fileReader(file!));
      this.renderMood(mood);
      await this.refreshRecommendations();
    } catch (err) {
      this.handleFailure(err);
    } finally {
      this.el.submitButton.disabled = false;
    }
  }

  private renderMood(mood: Parameters<typeof moodBadges>[0]): void {
    this.el.badges.textContent = '';
    for (const badge of moodBadges(mood)) {
      const span = this.doc.createElement('span');
      span.className = 'badge';
      span.dataset['label'] = badge.label;
      span.textContent = `${badge.text} (${badge.probabilityText})`;
      this.el.badges.appendChild(span);
    }
    this.el.bars.textContent = '';
    for (const bar of distributionBars(mood)) {
      const row = this.doc.createElement('div');
      row.className = 'bar-row';
      const name = this.doc.createElement('span');
      name.className = 'bar-label';
      name.textContent = bar.label;
      const track = this.doc.createElement('div');
      track.className = 'bar-track';
      const fill = this.doc.createElement('div');
      fill.className = 'bar-fill';
      fill.style.width = `${Math.round(bar.fraction * 100)}%`;
      fill.title = bar.percentText;
      track.appendChild(fill);
      row.append(name, track);
      this.el.bars.appendChild(row);
    }
  }

  async refreshRecommendations(): Promise<void> {
    this.clearError();
    this.el.refreshButton.disabled = true;
    try {
      const items = await this.client.recommendations(this.userId);
      this.renderCards(recommendationCards(items));
    } catch (err) {
      this.handleFailure(err);
    } finally {
      this.el.refreshButton.disabled = false;
    }
  }

  private renderCards(cards: ReturnType<typeof recommendationCards>): void {
    this.el.cards.textContent = '';
    for (const card of cards) {
      const li = this.doc.createElement('li');
      li.className = 'card';
      li.dataset['songId'] = card.songId;

      const title = this.doc.createElement('strong');
      title.textContent = card.title;
      const artist = this.doc.createElement('span');
      artist.className = 'artist';
      artist.textContent = card.artist;
      const score = this.doc.createElement('span');
      score.className = 'score';
      score.textContent = card.scoreText;
      const components = this.doc.createElement('small');
      components.textContent = card.componentsText;

      const like = this.doc.createElement('button');
      like.textContent = 'like';
      like.className = 'like';
      like.addEventListener('click', () => void this.sendFeedback(card.songId, 'like', like));
      const skip = this.doc.createElement('button');
      skip.textContent = 'skip';
      skip.className = 'skip';
      skip.addEventListener('click', () => void this.sendFeedback(card.songId, 'skip', skip));

      li.append(title, artist, score, components, like, skip);
      this.el.cards.appendChild(li);
    }
  }

  async sendFeedback(songId: string, kind: FeedbackKind, button?: HTMLButtonElement): Promise<void> {
    this.clearError();
    if (button) button.disabled = true;
    try {
      const result = await this.client.sendFeedback(this.userId, songId, kind);
      // display exactly the balance the service reports
      this.el.balance.textContent = String(result.token_balance);
      await this.refreshRecommendations();
    } catch (err) {
      this.handleFailure(err);
    } finally {
      if (button) button.disabled = false;
    }
  }

  private handleFailure(err: unknown): void {
    if (err instanceof ApiError) {
      if (err.status === 409) {
        this.showError(`Submit a mood first (${err.detail}).`);
      } else {
        this.showError(`Request failed: ${err.detail}`);
      }
      return;
    }
    this.showError('Network error, please retry.');
  }
}

export function bootstrap(doc: Document): App {
  const app = new App(doc, queryElements(doc), new MoodtunesClient());
  app.init();
  return app;
}
