const m0 = require('uuid');
const m1 = require('ms');
const m2 = require('commander');
const path = require('path');
module.exports = {};
