/**
 * Zod schemas for the server's JSON payloads.
 *
 * Every number the UI displays arrives pre-formatted in a `*_display`
 * string; the numeric fields exist only for hover tooltips and meters.
 */
import { z } from "zod";

export const TableRowSchema = z.object({
  name: z.string(),
  unit: z.string(),
  value: z.number(),
  value_display: z.string(),
  value_meter: z.number().min(0).max(1),
  factor_full: z.number(),
  factor_display: z.string(),
  delta_display: z.string().nullable(),
  effective_factor_display: z.string(),
  partial_contribution: z.number(),
  contribution_display: z.string(),
});

export const ExplanationTableSchema = z.object({
  version: z.string(),
  xai_type: z.string(),
  rows: z.array(TableRowSchema).min(1),
  adjustment: z.number(),
  adjustment_display: z.string(),
  explainer_estimate: z.number(),
  estimate_display: z.string(),
  predictor_prediction: z.number(),
  prediction_display: z.string(),
  percent_difference: z.number(),
  subspace_label: z.string().nullable(),
  rule_text: z.string().nullable(),
  what_if: z.boolean(),
});

export const FeatureMetaSchema = z.object({
  name: z.string(),
  unit: z.string(),
  min: z.number(),
  max: z.number(),
  std: z.number(),
});

export const ModelMetaSchema = z.object({
  version: z.string(),
  seed: z.number(),
  dataset: z.string(),
  task: z.string(),
  target_unit: z.string(),
  xai_types: z.array(z.string()),
  features: z.array(FeatureMetaSchema),
  rule: z.object({
    feature_index: z.number(),
    threshold: z.number(),
    typical_side: z.string(),
    text: z.string(),
  }),
  factors: z.record(z.unknown()),
});

export const InstanceSchema = z.object({
  values: z.array(z.number()),
  prediction: z.number(),
  subspace: z.enum(["typical", "outlier"]),
});

export const InstancesResponseSchema = z.object({
  instances: z.array(InstanceSchema),
});

export type TableRow = z.infer<typeof TableRowSchema>;
export type ExplanationTable = z.infer<typeof ExplanationTableSchema>;
export type ModelMeta = z.infer<typeof ModelMetaSchema>;
export type Instance = z.infer<typeof InstanceSchema>;
export type InstancesResponse = z.infer<typeof InstancesResponseSchema>;

export interface ExplainRequest {
  xai_type: string;
  values: number[];
  factor_overrides?: Record<string, number>;
  adjustment_override?: number;
}
