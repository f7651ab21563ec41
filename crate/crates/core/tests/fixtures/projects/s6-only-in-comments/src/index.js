// const chalk = require('chalk');
/* import chalk from 'chalk'; */
const ms = require('ms');
const s = "require('chalk')";
