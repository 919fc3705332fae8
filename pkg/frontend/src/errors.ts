/**
 * Error type for everything the renderer can refuse: missing or corrupt
 * artifacts, manifest mismatches, schema-version mismatches, and bad
 * figure specs. The CLI maps RenderError to exit code 2.
 */
export class RenderError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'RenderError';
  }
}
