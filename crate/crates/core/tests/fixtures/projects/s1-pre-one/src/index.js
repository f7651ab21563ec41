const m0 = require('tiny');
const m1 = require('rxjs');
const path = require('path');
module.exports = {};
