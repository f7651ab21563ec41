const m0 = require('mylib');
const m1 = require('lodash');
const path = require('path');
module.exports = {};
