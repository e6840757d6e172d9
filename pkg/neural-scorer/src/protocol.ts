/**
 * Wire protocol types and schemas.
 *
 * One JSON object per line, UTF-8:
 *   request:  {"id": "<string>", "text": "<finding text>"}
 *   response: {"id": "<string>", "sentence_certainty": <float>,
 *              "aspects": {six aspect keys -> label}}
 */

import { z } from 'zod';

export const ASPECTS = [
  'number', 'extent', 'probability', 'framing', 'condition', 'suggestion',
] as const;

export const ASPECT_LABELS = ['not_present', 'certain', 'uncertain'] as const;

export type Aspect = (typeof ASPECTS)[number];
export type AspectLabel = (typeof ASPECT_LABELS)[number];

export const SCALE_MIN = 1.0;
export const SCALE_MAX = 6.0;

export const RequestSchema = z.object({
  id: z.string(),
  text: z.string(),
});

export const ResponseSchema = z.object({
  id: z.string(),
  sentence_certainty: z.number().min(SCALE_MIN).max(SCALE_MAX),
  aspects: z.object({
    number: z.enum(ASPECT_LABELS),
    extent: z.enum(ASPECT_LABELS),
    probability: z.enum(ASPECT_LABELS),
    framing: z.enum(ASPECT_LABELS),
    condition: z.enum(ASPECT_LABELS),
    suggestion: z.enum(ASPECT_LABELS),
  }),
});

export type ScoreRequest = z.infer<typeof RequestSchema>;
export type ScoreResponse = z.infer<typeof ResponseSchema>;

export function clampCertainty(value: number): number {
  return Math.min(Math.max(value, SCALE_MIN), SCALE_MAX);
}
