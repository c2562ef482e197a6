/** Client-side plate cleanup, mirroring the server's canonicalization so
 * obviously bad entries never reach the network. The server re-validates. */

export const MAX_PLATE_LENGTH = 16;

export function canonicalizePlate(raw: string): string {
  const cleaned = raw.toUpperCase().replace(/[^A-Z0-9]/g, '');
  if (cleaned.length === 0) {
    throw new Error('plate has no usable characters');
  }
  if (cleaned.length > MAX_PLATE_LENGTH) {
    throw new Error(`plate too long after cleanup (${cleaned.length} > ${MAX_PLATE_LENGTH})`);
  }
  return cleaned;
}

export function validateEmbedding(values: unknown, expectedDim: number): number[] {
  if (!Array.isArray(values)) {
    throw new Error('embedding file must contain a JSON array');
  }
  if (values.length !== expectedDim) {
    throw new Error(`embedding has ${values.length} values, expected ${expectedDim}`);
  }
  for (const v of values) {
    if (typeof v !== 'number' || !Number.isFinite(v)) {
      throw new Error('embedding values must be finite numbers');
    }
  }
  return values as number[];
}
