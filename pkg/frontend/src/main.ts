#!/usr/bin/env node
// Print header information of FCVT tensor files.

import { read } from './reader.js';

const args = process.argv.slice(2);
if (args.length === 0) {
  console.error('usage: fcvt-info <file.fcvt> [...]');
  process.exit(1);
}

let failed = false;
for (const path of args) {
  try {
    const record = read(path);
    const shape = record.dims.join('x');
    console.log(`${path}: kind=${record.kind} fbs_k=${record.fbsK} ` +
      `shape=${shape} values=${record.values.length}`);
    console.log(`  metadata: ${JSON.stringify(record.metadata)}`);
  } catch (err) {
    console.error(`${path}: ${err instanceof Error ? err.message : err}`);
    failed = true;
  }
}
process.exit(failed ? 2 : 0);
