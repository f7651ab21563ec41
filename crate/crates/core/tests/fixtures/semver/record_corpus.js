// Records range verdicts from npm's reference semver implementation.
// Usage: NODE_PATH=$(npm root -g)/npm/node_modules node record_corpus.js > corpus.json
const semver = require('semver');

const ranges = [
  '^1.2.3', '~1.2.3', '1.2.3', '=1.2.3', 'v1.2.3', '>1.2.3', '>=1.2.3', '<2.0.0', '<=1.2.3',
  '*', '', 'x', '1.x', '1.2.x', '2.1.x', '1.X', '1.2.*', '1', '1.2',
  '^0.2.3', '~0.2.3', '0.2.3', '^0.0.3', '^0.0', '^0', '^1', '^1.2', '~1', '~1.2', '~0',
  '>=1.2.3 <1.5.0', '>1.0.0 <=1.4.0', '1.2.3 - 1.4.0', '1.2 - 1.4', '1.2.3 - 2',
  '^1.2.3 || ^2.0.0', '1.2.3 || 2.0.0', '<1.0.0 || >=2.0.0', '~1.2.3 || >=3.0.0',
  '^1.2.3-beta.2', '~1.2.3-beta.2', '>=1.2.3-alpha <1.2.4', '1.0.0-rc.1',
  '>= 1.2.3', '^ 1.2.3', '  ^1.2.3  ', '>=0.0.0', '<0.0.1', '^1.x', '~1.x', '>1', '<1.2', '>=1.2', '<=1.2', '>1.2',
  '~>1.2.3', '=1.2', '1.2.3-beta.2 - 1.2.4', '~1.2', '^1.2.x', '>=1.0.0-rc.1', '<1.0.0',
];

const versions = [
  '0.0.0', '0.0.1', '0.0.3', '0.0.4', '0.1.0', '0.2.3', '0.2.4', '0.2.9', '0.3.0', '0.9.0',
  '1.0.0-rc.1', '1.0.0', '1.0.1', '1.1.0', '1.2.0', '1.2.2', '1.2.3-alpha', '1.2.3-beta.2', '1.2.3-beta.3',
  '1.2.3', '1.2.4', '1.2.9', '1.3.0', '1.4.0', '1.4.1', '1.5.0', '1.9.9', '2.0.0-0', '2.0.0', '2.1.0',
  '2.1.3', '2.1.9', '2.2.0', '3.0.0', '3.4.1', '10.0.0',
];

const satisfies = [];
for (const r of ranges) {
  for (const v of versions) {
    satisfies.push({ range: r, version: v, include_prerelease: false,
      verdict: semver.satisfies(v, r) });
  }
  for (const v of ['1.2.3-alpha', '1.2.3-beta.3', '2.0.0-0', '1.0.0-rc.1', '1.2.0-alpha', '0.0.0-0', '1.0.0-0', '2.1.0-beta']) {
    satisfies.push({ range: r, version: v, include_prerelease: true,
      verdict: semver.satisfies(v, r, { includePrerelease: true }) });
  }
}

const lists = [
  ['1.2.3', '1.4.0', '2.0.0'],
  ['0.2.3', '0.2.9', '0.3.0', '1.0.0'],
  ['1.2.3-beta.2', '1.2.3-beta.3', '1.2.3', '1.2.4'],
  ['1.0.0', '1.2.2', '1.9.9', '2.0.0-0', '2.0.0', '3.0.0'],
  ['2.1.0', '2.1.3', '2.1.9', '2.2.0'],
  versions,
  [],
];
const maxSatisfying = [];
for (const r of ranges) {
  for (const list of lists) {
    maxSatisfying.push({ range: r, versions: list, max: semver.maxSatisfying(list, r) });
  }
}

const invalidRanges = ['latest', 'next', 'beta', 'foo', '>=x.y', '1.2.3.4', 'github:a/b', 'https://x.y/z.tgz',
  'file:../a', 'git+ssh://git@github.com/a/b.git', '^^1', 'a.b.c', '1.2.3-', '>=', '1.2.3 -', '01.2.3', '1.2.3+', '1..2'];
const rangeValidity = invalidRanges.map(r => ({ range: r, valid: semver.validRange(r) !== null }));

const pairs = [['1.0.0-alpha', '1.0.0'], ['1.0.0-alpha', '1.0.0-alpha.1'], ['1.0.0-alpha.1', '1.0.0-alpha.beta'],
  ['1.0.0-alpha.beta', '1.0.0-beta'], ['1.0.0-beta', '1.0.0-beta.2'], ['1.0.0-beta.2', '1.0.0-beta.11'],
  ['1.0.0-beta.11', '1.0.0-rc.1'], ['1.0.0-rc.1', '1.0.0'], ['1.9.9', '2.0.0'], ['1.2.3', '1.2.3'],
  ['1.2.3+build5', '1.2.3+other'], ['1.0.0-1', '1.0.0-a'], ['2.0.0', '10.0.0']];
const compare = pairs.map(([a, b]) => ({ a, b, ordering: semver.compare(a, b) }));

const diffPairs = [['1.0.0', '1.0.1'], ['1.0.1', '1.1.0'], ['1.9.9', '2.0.0'], ['1.2.3', '1.2.3'],
  ['1.0.1-beta.1', '1.0.1'], ['1.1.0-rc.1', '1.1.0'], ['1.0.0-rc.1', '1.0.0'], ['2.0.0-alpha', '2.0.0'],
  ['1.0.0-alpha', '1.0.0-beta'], ['1.2.3', '1.2.4-rc.0'], ['1.2.3', '1.3.0-0'], ['1.2.3', '2.0.0-0'],
  ['2.0.0', '1.9.9'], ['0.2.3', '0.3.0'], ['0.0.1', '0.0.2'], ['1.2.3+a', '1.2.3+b'], ['1.2.3-0', '1.2.4'],
  ['1.2.3-0', '1.3.0'], ['1.2.3-0', '2.0.0'], ['1.2.0-0', '1.3.0'], ['1.0.0-0', '1.2.0'], ['0.0.1-0', '0.0.1']];
const diff = diffPairs.map(([a, b]) => ({ a, b, diff: semver.diff(a, b) }));

console.log(JSON.stringify({ recorded_with: 'semver@' + require('semver/package.json').version,
  satisfies, max_satisfying: maxSatisfying, range_validity: rangeValidity, compare, diff }, null, 1));
