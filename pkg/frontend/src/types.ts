/** Shapes served by the annotation API. */

export interface MentionView {
  index: number;
  family: 'Gold' | 'Pred';
  text: string;
  label: string;
}

export interface Item {
  instance_id: string;
  task: 'ED' | 'EAE';
  direction: 'precision' | 'recall';
  instruction: string;
  criteria: string;
  context: string;
  judged_mentions: MentionView[];
  reference_mentions: MentionView[];
  /** token-level exact match per judged mention; limits reason-tag menus */
  em_match: boolean[];
  positive_label: string;
  negative_label: string;
  position: number;
  total: number;
}

export interface QueueDone {
  done: true;
  total: number;
}

export type NextResponse = Item | QueueDone;

export function isDone(r: NextResponse): r is QueueDone {
  return (r as QueueDone).done === true;
}

export interface Progress {
  total: number;
  judged: number;
  annotators: Record<string, number>;
}

export interface ReasonTagBody {
  category: string;
  mention_index: number;
}

export interface JudgmentBody {
  instance_id: string;
  direction: string;
  annotator: string;
  verdicts: number[];
  rationale?: string;
  reason_tags?: ReasonTagBody[];
}
